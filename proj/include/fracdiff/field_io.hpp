#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include "grid.hpp"

namespace fracdiff {

static_assert(std::endian::native == std::endian::little, "binary field container assumes a little-endian host");

/// Binary container: int32 d, int32 n, float64 L, then n^d float64 values in row-major order.
inline void write_field_binary(const std::string& path, const Field& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_field_binary: cannot open " + path);
    const std::int32_t d = f.grid.d, n = f.grid.n;
    const double L = f.grid.L;
    out.write(reinterpret_cast<const char*>(&d), sizeof d);
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    out.write(reinterpret_cast<const char*>(&L), sizeof L);
    out.write(reinterpret_cast<const char*>(f.values.data()), std::streamsize(f.values.size() * sizeof(double)));
    if (!out) throw std::runtime_error("write_field_binary: write failed for " + path);
}

inline Field read_field_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_field_binary: cannot open " + path);
    std::int32_t d = 0, n = 0;
    double L = 0.0;
    in.read(reinterpret_cast<char*>(&d), sizeof d);
    in.read(reinterpret_cast<char*>(&n), sizeof n);
    in.read(reinterpret_cast<char*>(&L), sizeof L);
    if (!in) throw std::runtime_error("read_field_binary: truncated header in " + path);
    Field f(make_grid(d, L, n));
    in.read(reinterpret_cast<char*>(f.values.data()), std::streamsize(f.values.size() * sizeof(double)));
    if (!in) throw std::runtime_error("read_field_binary: truncated payload in " + path);
    return f;
}

/// CSV with columns x,value (d=1 only). Values printed with 17 significant digits.
inline void write_field_csv(const std::string& path, const Field& f) {
    if (f.grid.d != 1) throw std::invalid_argument("write_field_csv: only d=1 fields");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_field_csv: cannot open " + path);
    out << "x,value\n";
    char buf[64];
    for (std::size_t i = 0; i < f.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", f.grid.coord(int(i)), f[i]);
        out << buf;
    }
}

}  // namespace fracdiff
