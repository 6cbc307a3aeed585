/* Independent reference implementations used only by tests.
 *
 * The kick reference builds the dense momentum-space matrix of
 * exp(-i z cos x) from the expansion sum_k (-i)^k J_k(z) e^{ikx}, so it
 * shares no code with the FFT path it checks.
 */
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

namespace oracle {

inline std::complex<double> minus_i_pow(long k) {
    switch (((k % 4) + 4) % 4) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, -1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, 1.0};
    }
}

// J_k(z) for any integer k; J_{-k} = (-1)^k J_k.
inline double bessel_j(long k, double z) {
    const double v = std::cyl_bessel_j(static_cast<double>(std::labs(k)), z);
    return (k < 0 && (k % 2) != 0) ? -v : v;
}

using CVec = std::vector<std::complex<double>>;
using CMat = std::vector<CVec>;

// Dense kick matrix U[(n+n_max)][(m+n_max)] = (-i)^(n-m) J_{n-m}(K/kbar).
inline CMat kick_matrix(int n_max, double K, double kbar) {
    const double z = K / kbar;
    const int dim = 2 * n_max + 1;
    CMat u(static_cast<std::size_t>(dim), CVec(static_cast<std::size_t>(dim)));
    for (int n = -n_max; n <= n_max; ++n)
        for (int m = -n_max; m <= n_max; ++m)
            u[static_cast<std::size_t>(n + n_max)][static_cast<std::size_t>(m + n_max)] =
                minus_i_pow(n - m) * bessel_j(n - m, z);
    return u;
}

inline CVec apply_matrix(const CMat& u, const CVec& v) {
    CVec out(u.size(), {0.0, 0.0});
    for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) out[i] += u[i][j] * v[j];
    return out;
}

struct Line {
    double slope = 0.0;
    double intercept = 0.0;
};

inline Line fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    Line l;
    l.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    l.intercept = (sy - l.slope * sx) / n;
    return l;
}

inline double binomial_sd(double n, double p) { return std::sqrt(n * p * (1.0 - p)); }

}  // namespace oracle
