#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "fracdiff/campaign.hpp"
#include "fracdiff/config.hpp"

using namespace fracdiff;

namespace {

ConfigError expect_error(const std::string& text) {
    try {
        parse_config_text(text, "t.toml");
    } catch (const ConfigError& e) {
        return e;
    }
    ADD_FAILURE() << "no ConfigError for:\n" << text;
    return ConfigError("", 0, "", "");
}

}  // namespace

TEST(TomlSubset, ParsesScalarsAndArrays) {
    const auto raw = parse_toml_subset(
        "# comment\n[a]\nx = 1.5e-3  # trailing\ny = true\nz = \"q\\\"s\"\nw = [1, 2.5, -3]\n\n[b]\nx = [\"p\", \"q\"]\n");
    ASSERT_EQ(raw.entries.size(), 5u);
    EXPECT_DOUBLE_EQ(std::get<double>(raw.entries.at("a.x").v), 1.5e-3);
    EXPECT_TRUE(std::get<bool>(raw.entries.at("a.y").v));
    EXPECT_EQ(std::get<std::string>(raw.entries.at("a.z").v), "q\"s");
    EXPECT_EQ(std::get<std::vector<ConfigScalar>>(raw.entries.at("a.w").v).size(), 3u);
    EXPECT_EQ(raw.entries.at("b.x").line, 9);
}

TEST(TomlSubset, RejectsMalformedInput) {
    EXPECT_THROW(parse_toml_subset("x = 1\n"), ConfigError);
    EXPECT_THROW(parse_toml_subset("[a]\nx = 1\nx = 2\n"), ConfigError);
    EXPECT_THROW(parse_toml_subset("[a]\nx = \"open\n"), ConfigError);
    EXPECT_THROW(parse_toml_subset("[a]\nx = [1, 2\n"), ConfigError);
    EXPECT_THROW(parse_toml_subset("[a]\nx = 1 2\n"), ConfigError);
    EXPECT_THROW(parse_toml_subset("[a\n"), ConfigError);
}

TEST(Config, MinimalFileEchoesDefaults) {
    const RunConfig c = parse_config_text("[run]\nsuite = \"operator\"\n", "min.toml");
    EXPECT_EQ(c.suite, "operator");
    EXPECT_EQ(c.name, "operator");
    const auto j = c.to_json();
    for (const char* k : {"run", "params", "grid", "solver", "snapshots", "data", "check", "tolerances"})
        EXPECT_TRUE(j.contains(k)) << k;
    EXPECT_DOUBLE_EQ(j["tolerances"]["exponent"].get<double>(), 0.1);
    // identical text gives identical effective configuration
    EXPECT_EQ(run_config_hash(c), run_config_hash(parse_config_text("[run]\nsuite = \"operator\"\n", "other.toml")));
}

TEST(Config, UnknownKeyNamesKeyAndLine) {
    const auto e = expect_error("[run]\nsuite = \"gfde\"\n[params]\nm = 0.5\ns = 0.75\nd = 1\nbogus = 3\n");
    EXPECT_EQ(e.key(), "params.bogus");
    EXPECT_EQ(e.line(), 7);
    EXPECT_NE(std::string(e.what()).find("t.toml:7"), std::string::npos);
}

TEST(Config, MissingRequiredKey) {
    EXPECT_EQ(expect_error("[params]\nm = 0.5\n").key(), "run.suite");
    EXPECT_EQ(expect_error("[run]\nsuite = \"evolve\"\n[params]\nm = 0.5\ns = 0.75\n").key(), "params.d");
}

TEST(Config, RegimeValidation) {
    const RunConfig g = parse_config_text("[run]\nsuite = \"gfde\"\n[params]\nm = 0.3\ns = 0.75\nd = 1\n");
    EXPECT_EQ(g.params.regime(), Regime::good_fast);
    const auto e = expect_error("[run]\nsuite = \"vfde\"\n[params]\nm = 0.3\ns = 0.75\nd = 1\n");
    EXPECT_EQ(e.key(), "params.m");
    EXPECT_NE(e.reason().find("2s >= d"), std::string::npos);
    EXPECT_EQ(expect_error("[run]\nsuite = \"pme\"\n[params]\nm = 0.9\ns = 0.5\nd = 1\n").key(), "params.m");
    EXPECT_EQ(expect_error("[run]\nsuite = \"linear\"\n[params]\nm = 2\ns = 0.5\nd = 1\n").key(), "params.m");
    EXPECT_EQ(expect_error("[run]\nsuite = \"gfde\"\n[params]\nm = 1.2\ns = 0.75\nd = 1\n").key(), "params.m");
}

TEST(Config, ValueValidation) {
    const std::string head = "[run]\nsuite = \"operator\"\n";
    EXPECT_EQ(expect_error(head + "[grid]\nn = 100\n").key(), "grid.n");
    EXPECT_EQ(expect_error(head + "[solver]\neps_t = 0.5\n").key(), "solver.eps_t");
    EXPECT_EQ(expect_error(head + "[solver]\nexterior = \"reflecting\"\n").key(), "solver.exterior");
    EXPECT_EQ(expect_error(head + "[grid]\nn = \"big\"\n").key(), "grid.n");
    EXPECT_EQ(expect_error("[run]\nsuite = \"nope\"\n").key(), "run.suite");
}

TEST(Config, FileOverridesPreset) {
    const RunConfig c = parse_config_text("[run]\nsuite = \"operator\"\nname = \"op2\"\nseed = 42\n[grid]\nn = 256\n");
    EXPECT_EQ(c.n, 256);
    EXPECT_EQ(c.seed, 42u);
    EXPECT_EQ(c.name, "op2");
    EXPECT_NE(run_config_hash(c), run_config_hash(parse_config_text("[run]\nsuite = \"operator\"\n")));
}

TEST(Manifest, EmptyCampaignSucceeds) {
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / "fracdiff_empty_campaign";
    fs::remove_all(root);
    const auto m = parse_manifest_text("[campaign]\nname = \"empty\"\nconfigs = []\n", root.string());
    EXPECT_TRUE(m.runs.empty());
    const auto out = run_campaign(m, root.string());
    EXPECT_EQ(out.exit_code, 0);
    std::ostringstream log;
    EXPECT_EQ(summarize_campaign(out.directory, log), 0);
    EXPECT_TRUE(fs::exists(fs::path(out.directory) / "index.json"));
}

TEST(Manifest, ResolvesConfigsRelativeToManifest) {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "fracdiff_manifest_test";
    fs::create_directories(dir);
    std::ofstream(dir / "a.toml") << "[run]\nsuite = \"operator\"\nname = \"a\"\n";
    std::ofstream(dir / "b.toml") << "[run]\nsuite = \"weights\"\nname = \"b\"\n";
    const auto m = parse_manifest_text("[campaign]\nname = \"c\"\nconfigs = [\"a.toml\", \"b.toml\"]\n", dir.string());
    ASSERT_EQ(m.runs.size(), 2u);
    EXPECT_EQ(m.runs[1].suite, "weights");
    EXPECT_THROW(parse_manifest_text("[campaign]\nconfigs = [\"a.toml\", \"a.toml\"]\n", dir.string()), ConfigError);
    EXPECT_THROW(parse_manifest_text("[campaign]\nconfigs = [\"missing.toml\"]\n", dir.string()), ConfigError);
    EXPECT_THROW(parse_manifest_text("[campaign]\nextra = 1\n", dir.string()), ConfigError);
}
