#include "glr/fft.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <vector>

namespace glr {

void fft2(Eigen::MatrixXcd& m, bool inverse) {
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> in, out;
    const Eigen::Index rows = m.rows(), cols = m.cols();

    in.resize(std::size_t(cols));
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) in[std::size_t(c)] = m(r, c);
        if (inverse) fft.inv(out, in); else fft.fwd(out, in);
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = out[std::size_t(c)];
    }
    in.resize(std::size_t(rows));
    for (Eigen::Index c = 0; c < cols; ++c) {
        for (Eigen::Index r = 0; r < rows; ++r) in[std::size_t(r)] = m(r, c);
        if (inverse) fft.inv(out, in); else fft.fwd(out, in);
        for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = out[std::size_t(r)];
    }
}

void fft2_unitary(Eigen::MatrixXcd& m, bool inverse) {
    fft2(m, inverse);
    const double n = double(m.rows()) * double(m.cols());
    m *= inverse ? std::sqrt(n) : 1.0 / std::sqrt(n);
}

int next_pow2(int n) {
    int p = 1;
    while (p < n) p <<= 1;
    return p;
}

} // namespace glr
