#include "collar/eigen_sym3.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace collar {
namespace {

constexpr int kMaxSweeps = 64;

void rotate(Mat3& a, Mat3& v, int p, int q) {
    const double apq = a(p, q);
    if (apq == 0.0) return;
    const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
    const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
    const double c = 1.0 / std::sqrt(t * t + 1.0);
    const double s = t * c;

    // A <- J^T A J with J the (p, q) Givens rotation.
    for (int k = 0; k < 3; ++k) {
        const double akp = a(k, p);
        const double akq = a(k, q);
        a(k, p) = c * akp - s * akq;
        a(k, q) = s * akp + c * akq;
    }
    for (int k = 0; k < 3; ++k) {
        const double apk = a(p, k);
        const double aqk = a(q, k);
        a(p, k) = c * apk - s * aqk;
        a(q, k) = s * apk + c * aqk;
    }
    a(p, q) = 0.0;
    a(q, p) = 0.0;

    for (int k = 0; k < 3; ++k) {
        const double vkp = v(k, p);
        const double vkq = v(k, q);
        v(k, p) = c * vkp - s * vkq;
        v(k, q) = s * vkp + c * vkq;
    }
}

}  // namespace

SymmetricEigen3 eigen_symmetric(const Mat3& m) {
    Mat3 a;
    for (int i = 0; i < 3; ++i) {
        for (int j = i; j < 3; ++j) {
            a(i, j) = m(i, j);
            a(j, i) = m(i, j);
        }
    }
    Mat3 v = Mat3::Identity();

    constexpr std::array<std::array<int, 2>, 3> pairs = {{{0, 1}, {0, 2}, {1, 2}}};
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        const double off = std::abs(a(0, 1)) + std::abs(a(0, 2)) + std::abs(a(1, 2));
        if (off == 0.0) break;
        for (const auto& [p, q] : pairs) {
            const double g = 100.0 * std::abs(a(p, q));
            // Off-diagonal entries below the diagonals' resolution are dropped.
            if (sweep > 3 && std::abs(a(p, p)) + g == std::abs(a(p, p)) &&
                std::abs(a(q, q)) + g == std::abs(a(q, q))) {
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                continue;
            }
            rotate(a, v, p, q);
        }
    }

    std::array<int, 3> idx = {0, 1, 2};
    std::stable_sort(idx.begin(), idx.end(), [&](int i, int j) { return a(i, i) < a(j, j); });

    SymmetricEigen3 out;
    for (int k = 0; k < 3; ++k) {
        out.values[k] = a(idx[k], idx[k]);
        Vec3 col = v.col(idx[k]);
        int lead = 0;
        for (int i = 1; i < 3; ++i) {
            if (std::abs(col[i]) > std::abs(col[lead])) lead = i;
        }
        if (col[lead] < 0.0) col = -col;
        out.vectors.col(k) = col;
    }
    return out;
}

}  // namespace collar
