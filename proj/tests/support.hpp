#pragma once

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace testsupport {

// Scratch directory unique to the process, removed on demand by ctest reruns.
inline std::filesystem::path temp_dir() {
    static const std::filesystem::path dir = [] {
        auto d = std::filesystem::temp_directory_path() /
                 ("confusion_tests_" + std::to_string(::getpid()));
        std::filesystem::create_directories(d);
        return d;
    }();
    return dir;
}

inline std::string write_file(const std::string& name, const std::string& content) {
    const auto path = temp_dir() / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path.string();
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    return content;
}

// ---- independent quadrature oracles -------------------------------------
// Composite Simpson; panels must be even.
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      int panels) {
    const double h = (b - a) / panels;
    double sum = f(a) + f(b);
    for (int i = 1; i < panels; ++i) {
        sum += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    }
    return sum * h / 3.0;
}

inline double f_pdf(double x, double d1, double d2) {
    if (x <= 0) return 0;
    const double log_num = 0.5 * (d1 * std::log(d1 * x) + d2 * std::log(d2)) -
                           0.5 * (d1 + d2) * std::log(d1 * x + d2);
    const double log_b = std::lgamma(d1 / 2) + std::lgamma(d2 / 2) -
                         std::lgamma((d1 + d2) / 2);
    return std::exp(log_num - log_b) / x;
}

// P(F > f) by integrating the density over (f, infinity) with x = f + tan(t).
inline double f_survival_oracle(double f, double d1, double d2) {
    auto integrand = [&](double t) {
        if (t >= M_PI_2) return 0.0;
        const double sec = 1.0 / std::cos(t);
        return f_pdf(f + std::tan(t), d1, d2) * sec * sec;
    };
    return simpson(integrand, 0.0, M_PI_2, 20000);
}

inline double t_pdf(double x, double df) {
    const double log_c = std::lgamma((df + 1) / 2) - std::lgamma(df / 2) -
                         0.5 * std::log(df * M_PI);
    return std::exp(log_c - 0.5 * (df + 1) * std::log1p(x * x / df));
}

// Two-sided tail 2*P(T > t) for t >= 0.
inline double t_two_sided_oracle(double t, double df) {
    auto integrand = [&](double u) {
        if (u >= M_PI_2) return 0.0;
        const double sec = 1.0 / std::cos(u);
        return t_pdf(t + std::tan(u), df) * sec * sec;
    };
    return 2.0 * simpson(integrand, 0.0, M_PI_2, 20000);
}

// Deterministic normal draws for test fixtures (independent of library RNG).
inline std::vector<double> normal_draws(std::size_t n, std::uint64_t seed,
                                        double mean = 0.0, double sd = 1.0) {
    std::mt19937_64 engine(seed);
    std::vector<double> out;
    out.reserve(n);
    bool have = false;
    double spare = 0;
    auto unit = [&] {
        return static_cast<double>(engine() >> 11) * 0x1.0p-53;
    };
    while (out.size() < n) {
        if (have) {
            out.push_back(mean + sd * spare);
            have = false;
            continue;
        }
        double u, v, s;
        do {
            u = 2 * unit() - 1;
            v = 2 * unit() - 1;
            s = u * u + v * v;
        } while (s >= 1 || s == 0);
        const double m = std::sqrt(-2 * std::log(s) / s);
        spare = v * m;
        have = true;
        out.push_back(mean + sd * u * m);
    }
    return out;
}

} // namespace testsupport
