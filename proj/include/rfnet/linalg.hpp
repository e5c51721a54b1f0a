#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "rfnet/tensor.hpp"

namespace rfnet::num {

// Eigenvalues of a symmetric matrix by the cyclic Jacobi method. The sizes
// here are tiny (N_c x N_c and M x M Hessians), so simplicity wins.
template <class T>
std::vector<T> symmetric_eigenvalues(TensorT<T> a) {
    require(a.rank() == 2 && a.dim(0) == a.dim(1), "symmetric_eigenvalues: square matrix expected");
    const int n = a.dim(0);
    for (int sweep = 0; sweep < 100; ++sweep) {
        T off = T(0);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += a.at(i, j) * a.at(i, j);
        if (off < T(1e-24)) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(a.at(p, q)) < T(1e-300)) continue;
                T theta = (a.at(q, q) - a.at(p, p)) / (T(2) * a.at(p, q));
                T sgn = theta >= T(0) ? T(1) : T(-1);
                T t = sgn / (std::abs(theta) + std::sqrt(theta * theta + T(1)));
                T c = T(1) / std::sqrt(t * t + T(1));
                T s = t * c;
                for (int k = 0; k < n; ++k) {
                    T akp = a.at(k, p), akq = a.at(k, q);
                    a.at(k, p) = c * akp - s * akq;
                    a.at(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    T apk = a.at(p, k), aqk = a.at(q, k);
                    a.at(p, k) = c * apk - s * aqk;
                    a.at(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<T> ev(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = a.at(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

}  // namespace rfnet::num
