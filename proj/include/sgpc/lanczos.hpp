/*
 * Copyright (c) 2026, The SGPC Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Eigenvalues>

#include "sgpc/core.hpp"

namespace sgpc {

struct LanczosOptions {
    int max_steps = 300;
    /// Ritz pair accepted when ||A y - theta y|| <= tol * max |theta|.
    double tol = 1e-9;
    int restarts = 4;
    std::uint64_t seed = 0x5eedULL;
};

/// Ritz pairs sorted by ascending value, with true residual norms for the
/// requested low end and the top pair.
struct RitzPairs {
    Vector values;
    Matrix vectors;
    Vector residuals;
    bool converged = false;
    int steps = 0;
};

namespace detail {

inline void orthogonalize(Vector& w, const Matrix& basis, Index used)
{
    if (used == 0) {
        return;
    }
    // Two passes of classical Gram-Schmidt keep the basis orthogonal to working precision.
    for (int pass = 0; pass < 2; ++pass) {
        Vector coeff = basis.leftCols(used).transpose() * w;
        w.noalias() -= basis.leftCols(used) * coeff;
    }
}

inline Vector random_unit(Index dim, std::mt19937_64& rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector v(dim);
    for (Index i = 0; i < dim; ++i) {
        v[i] = normal(rng);
    }
    return v;
}

} // namespace detail

/// Lanczos with full reorthogonalization on the orthogonal complement of
/// `deflation` (orthonormal columns, possibly empty). Computes every Ritz pair
/// of the Krylov space and restarts explicitly from the lowest Ritz vector until
/// the `n_low` smallest pairs and the largest pair meet the residual tolerance.
///
/// Invariant-subspace breakdowns restart the recurrence with a fresh random
/// direction, so repeated eigenvalues are resolved when the budget covers them.
template <typename ApplyFn>
RitzPairs lanczos(ApplyFn&& apply, Index dim, const Matrix& deflation, int n_low, const LanczosOptions& opt)
{
    const Index ndefl = deflation.cols();
    const Index space = dim - ndefl;
    RitzPairs out;
    if (space <= 0) {
        out.converged = true;
        return out;
    }
    const Index kmax = std::min<Index>(space, std::max(opt.max_steps, 2));
    std::mt19937_64 rng(opt.seed);

    auto project = [&](Vector& w) {
        if (ndefl > 0) {
            detail::orthogonalize(w, deflation, ndefl);
        }
    };
    // Orthogonalizes against the deflation space and the Krylov basis together;
    // separate passes let rounding leak back into the deflated directions.
    auto orthogonalize_all = [&](Vector& w, const Matrix& basis, Index used) {
        for (int pass = 0; pass < 2; ++pass) {
            if (ndefl > 0) {
                w.noalias() -= deflation * (deflation.transpose() * w);
            }
            if (used > 0) {
                w.noalias() -= basis.leftCols(used) * (basis.leftCols(used).transpose() * w);
            }
        }
    };

    Vector start = detail::random_unit(dim, rng);
    for (int round = 0; round <= opt.restarts; ++round) {
        Matrix V(dim, kmax);
        Matrix AV(dim, kmax);

        Vector v = start;
        project(v);
        if (v.norm() < 1e-300) {
            v = detail::random_unit(dim, rng);
            project(v);
        }
        v.normalize();
        Index k = 0;
        double scale = 0.0;
        Vector w(dim);
        while (k < kmax) {
            V.col(k) = v;
            apply(v, w);
            project(w);
            AV.col(k) = w;
            double a = v.dot(w);
            scale = std::max(scale, std::abs(a));
            ++k;
            if (k == kmax) {
                break;
            }
            orthogonalize_all(w, V, k);
            double b = w.norm();
            scale = std::max(scale, b);
            if (b <= 1e-12 * std::max(scale, 1e-300)) {
                // Invariant subspace: continue from a fresh direction.
                Vector fresh = detail::random_unit(dim, rng);
                orthogonalize_all(fresh, V, k);
                double fn = fresh.norm();
                if (fn < 1e-10) {
                    break;
                }
                v = fresh / fn;
            } else {
                v = w / b;
            }
        }
        // Rayleigh-Ritz on the stored products rather than the recurrence
        // coefficients, so breakdown restarts cannot drop couplings.
        Matrix T = V.leftCols(k).transpose() * AV.leftCols(k);
        T = 0.5 * (T + T.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Matrix> tri(T);
        out.values = tri.eigenvalues();
        out.vectors = V.leftCols(k) * tri.eigenvectors();
        out.steps += static_cast<int>(k);

        const double top = std::max(std::abs(out.values[0]), std::abs(out.values[k - 1]));
        out.residuals = Vector::Zero(k);
        bool ok = true;
        std::vector<Index> check;
        for (Index i = 0; i < std::min<Index>(n_low, k); ++i) {
            check.push_back(i);
        }
        check.push_back(k - 1);
        for (Index i : check) {
            Vector y = out.vectors.col(i);
            Vector ay(dim);
            apply(y, ay);
            project(ay);
            out.residuals[i] = (ay - out.values[i] * y).norm();
            if (out.residuals[i] > opt.tol * std::max(top, 1e-300)) {
                ok = false;
            }
        }
        out.converged = ok;
        if (ok || k == space) {
            // A full Krylov space is exact up to rounding; nothing to gain from restarts.
            out.converged = ok || k == space;
            return out;
        }
        start = out.vectors.col(0);
        if (n_low > 1 && k > 1) {
            start += 0.5 * out.vectors.col(1);
        }
    }
    return out;
}

} // namespace sgpc
