// Binary and CSV serialization of torus fields.
//
// Binary layout (little-endian, no padding):
//   float64 L, int64 N, int64 K, then K blocks of N*N float64.
//   Block k stores component k row-major: for i in 0..N-1 (x1 index), for j in 0..N-1 (x2 index).
#pragma once

#include "eulerci/torus.hpp"

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <string>

namespace eulerci {

template <int K>
void write_field_binary(const std::string& path, const TorusField<double, K>& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path);
    const double L = f.grid.L;
    const std::int64_t N = f.grid.N, k = K;
    os.write(reinterpret_cast<const char*>(&L), sizeof L);
    os.write(reinterpret_cast<const char*>(&N), sizeof N);
    os.write(reinterpret_cast<const char*>(&k), sizeof k);
    for (int c = 0; c < K; ++c)
        for (int i = 0; i < f.grid.N; ++i)
            for (int j = 0; j < f.grid.N; ++j) {
                const double v = f[c](i, j);
                os.write(reinterpret_cast<const char*>(&v), sizeof v);
            }
}

template <int K>
TorusField<double, K> read_field_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    double L;
    std::int64_t N, k;
    is.read(reinterpret_cast<char*>(&L), sizeof L);
    is.read(reinterpret_cast<char*>(&N), sizeof N);
    is.read(reinterpret_cast<char*>(&k), sizeof k);
    if (!is || k != K) throw std::runtime_error("component count mismatch in " + path);
    TorusField<double, K> f(TorusGrid(L, static_cast<int>(N)));
    for (int c = 0; c < K; ++c)
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) is.read(reinterpret_cast<char*>(&f[c](i, j)), sizeof(double));
    if (!is) throw std::runtime_error("truncated field file " + path);
    return f;
}

// Columns x1,x2,c0..c{K-1}; stride > 1 thins the output for plotting.
template <int K>
void write_field_csv(const std::string& path, const TorusField<double, K>& f, int stride = 1) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << "x1,x2";
    for (int c = 0; c < K; ++c) os << ",c" << c;
    os << '\n' << std::setprecision(12);
    for (int i = 0; i < f.grid.N; i += stride)
        for (int j = 0; j < f.grid.N; j += stride) {
            os << f.grid.coord(i) << ',' << f.grid.coord(j);
            for (int c = 0; c < K; ++c) os << ',' << f[c](i, j);
            os << '\n';
        }
}

}  // namespace eulerci
