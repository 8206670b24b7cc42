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

#include <cmath>

#include "sgpc/core.hpp"

namespace sgpc {

struct CgOptions {
    /// Absolute tolerance on the unpreconditioned residual norm.
    double tol = 1e-6;
    int max_iter = 1000;
};

struct CgResult {
    Vector x;
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
};

struct IdentityPreconditioner {
    void operator()(const Vector& r, Vector& z) const { z = r; }
};

/// Preconditioned conjugate gradients for a symmetric positive (semi)definite
/// operator. `precond(r, z)` writes an approximation of A^{-1} r into z.
/// Starts from `x0` when given, otherwise from zero.
template <typename ApplyFn, typename PrecFn = IdentityPreconditioner>
CgResult cg_solve(ApplyFn&& apply, const Vector& b, const CgOptions& opt, const Vector* x0 = nullptr,
                  PrecFn&& precond = PrecFn{})
{
    CgResult res;
    const Index n = b.size();
    res.x = (x0 != nullptr && x0->size() == n) ? *x0 : Vector::Zero(n);
    Vector r(n);
    Vector ap(n);
    apply(res.x, ap);
    r = b - ap;
    res.residual = r.norm();
    if (res.residual <= opt.tol) {
        res.converged = true;
        return res;
    }
    Vector z(n);
    precond(r, z);
    Vector p = z;
    double rz = r.dot(z);
    while (res.iterations < opt.max_iter) {
        apply(p, ap);
        const double pap = p.dot(ap);
        if (!(pap > 0.0)) {
            break;
        }
        const double step = rz / pap;
        res.x.noalias() += step * p;
        r.noalias() -= step * ap;
        ++res.iterations;
        res.residual = r.norm();
        if (res.residual <= opt.tol) {
            res.converged = true;
            return res;
        }
        precond(r, z);
        const double rz_next = r.dot(z);
        p = z + (rz_next / rz) * p;
        rz = rz_next;
    }
    return res;
}

} // namespace sgpc
