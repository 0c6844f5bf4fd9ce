// Copyright 2026 The rlqc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rlqc/unitary.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "rlqc/errors.hpp"

namespace rlqc {

UnitaryMatrix UnitaryMatrix::checked(Complex a00, Complex a01, Complex a10, Complex a11, double tolerance) {
    UnitaryMatrix u(a00, a01, a10, a11);
    for (const Complex &z : u.m_) {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
            throw ValidationError("matrix has non-finite entries");
        }
    }
    const double err = unitarity_error(u);
    if (!(err <= tolerance)) {
        std::ostringstream msg;
        msg << "matrix is not unitary: max |U^dagger U - I| = " << err;
        throw ValidationError(msg.str());
    }
    return u;
}

UnitaryMatrix UnitaryMatrix::from_reals(std::span<const double, 8> r) {
    return UnitaryMatrix(Complex(r[0], r[1]), Complex(r[2], r[3]), Complex(r[4], r[5]), Complex(r[6], r[7]));
}

std::array<double, 8> UnitaryMatrix::to_reals() const {
    return {m_[0].real(), m_[0].imag(), m_[1].real(), m_[1].imag(),
            m_[2].real(), m_[2].imag(), m_[3].real(), m_[3].imag()};
}

UnitaryMatrix scaled(const UnitaryMatrix &u, Complex factor) {
    return UnitaryMatrix(u(0, 0) * factor, u(0, 1) * factor, u(1, 0) * factor, u(1, 1) * factor);
}

double unitarity_error(const UnitaryMatrix &u) {
    const UnitaryMatrix g = compose(dagger(u), u);
    return max_abs_diff(g, UnitaryMatrix::identity());
}

double max_abs_diff(const UnitaryMatrix &a, const UnitaryMatrix &b) {
    double err = 0.0;
    for (int i = 0; i < 4; ++i) {
        err = std::max(err, std::abs(a.entries()[i] - b.entries()[i]));
    }
    return err;
}

UnitaryMatrix nearest_unitary(const UnitaryMatrix &m) {
    // sqrt of the 2x2 positive matrix A = M^dagger M: (A + sqrt(det A) I) / sqrt(tr A + 2 sqrt(det A)).
    const UnitaryMatrix a = compose(dagger(m), m);
    const double det = determinant(a).real();
    if (!(det > 0.0)) {
        throw DomainError("nearest_unitary: singular matrix");
    }
    const double s = std::sqrt(det);
    const double t = std::sqrt(trace(a).real() + 2.0 * s);
    const UnitaryMatrix p((a(0, 0) + s) / t, a(0, 1) / t, a(1, 0) / t, (a(1, 1) + s) / t);
    const Complex pdet = determinant(p);
    const UnitaryMatrix p_inv(p(1, 1) / pdet, -p(0, 1) / pdet, -p(1, 0) / pdet, p(0, 0) / pdet);
    return compose(m, p_inv);
}

namespace {

Complex complex_normal(RngStream &rng) {
    const double re = rng.normal();
    const double im = rng.normal();
    return Complex(re, im);
}

}  // namespace

UnitaryMatrix haar_sample(RngStream &rng) {
    // Columns of a Ginibre matrix.
    const Complex z00 = complex_normal(rng);
    const Complex z10 = complex_normal(rng);
    const Complex z01 = complex_normal(rng);
    const Complex z11 = complex_normal(rng);

    // Gram-Schmidt QR. The resulting R has a real positive diagonal, so the
    // phase correction diag(r_ii / |r_ii|) is the identity here.
    const double r00 = std::sqrt(std::norm(z00) + std::norm(z10));
    const Complex q00 = z00 / r00;
    const Complex q10 = z10 / r00;
    const Complex r01 = std::conj(q00) * z01 + std::conj(q10) * z11;
    Complex v0 = z01 - r01 * q00;
    Complex v1 = z11 - r01 * q10;
    // One re-orthogonalization pass keeps |Q^dagger Q - I| at rounding level.
    const Complex c = std::conj(q00) * v0 + std::conj(q10) * v1;
    v0 -= c * q00;
    v1 -= c * q10;
    const double r11 = std::sqrt(std::norm(v0) + std::norm(v1));
    return UnitaryMatrix(q00, v0 / r11, q10, v1 / r11);
}

std::array<Complex, 2> haar_state(RngStream &rng) {
    const Complex a = complex_normal(rng);
    const Complex b = complex_normal(rng);
    const double norm = std::sqrt(std::norm(a) + std::norm(b));
    return {a / norm, b / norm};
}

std::string format_matrix(const UnitaryMatrix &u) {
    std::string out;
    char buf[32];
    const auto reals = u.to_reals();
    for (std::size_t i = 0; i < reals.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", reals[i]);
        if (i > 0) {
            out += ' ';
        }
        out += buf;
    }
    return out;
}

UnitaryMatrix parse_matrix(std::string_view text) {
    std::array<double, 8> reals{};
    std::size_t count = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) {
            ++pos;
        }
        if (pos >= text.size()) {
            break;
        }
        std::size_t end = pos;
        while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) {
            ++end;
        }
        if (count == reals.size()) {
            throw ParseError("expected 8 floats, found more", 0);
        }
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + end, value);
        if (ec != std::errc() || ptr != text.data() + end) {
            throw ParseError("invalid float '" + std::string(text.substr(pos, end - pos)) + "'", 0);
        }
        reals[count++] = value;
        pos = end;
    }
    if (count != reals.size()) {
        throw ParseError("expected 8 floats, found " + std::to_string(count), 0);
    }
    const UnitaryMatrix u = UnitaryMatrix::from_reals(reals);
    return UnitaryMatrix::checked(u(0, 0), u(0, 1), u(1, 0), u(1, 1));
}

}  // namespace rlqc
