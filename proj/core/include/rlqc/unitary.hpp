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

#pragma once

#include <array>
#include <complex>
#include <span>
#include <string>
#include <string_view>

#include "rlqc/rng.hpp"

namespace rlqc {

using Complex = std::complex<double>;

/// 2x2 complex matrix, row-major (a00, a01, a10, a11).
///
/// Values built with `checked` are unitary within `kUnitarityTolerance`.
/// Products computed internally are not re-validated; they drift by at most a
/// few ulps per multiplication.
class UnitaryMatrix {
   public:
    static constexpr double kUnitarityTolerance = 1e-10;

    constexpr UnitaryMatrix() : m_{Complex(1, 0), Complex(0, 0), Complex(0, 0), Complex(1, 0)} {
    }
    constexpr UnitaryMatrix(Complex a00, Complex a01, Complex a10, Complex a11) : m_{a00, a01, a10, a11} {
    }

    static constexpr UnitaryMatrix identity() {
        return UnitaryMatrix();
    }

    /// Builds a matrix from external input; throws ValidationError unless unitary.
    static UnitaryMatrix checked(Complex a00, Complex a01, Complex a10, Complex a11,
                                 double tolerance = kUnitarityTolerance);

    /// Interleaved re/im row-major reals: re00 im00 re01 im01 re10 im10 re11 im11.
    static UnitaryMatrix from_reals(std::span<const double, 8> reals);
    std::array<double, 8> to_reals() const;

    constexpr const Complex &operator()(int row, int col) const {
        return m_[2 * row + col];
    }
    constexpr Complex &operator()(int row, int col) {
        return m_[2 * row + col];
    }
    constexpr const std::array<Complex, 4> &entries() const {
        return m_;
    }

    bool operator==(const UnitaryMatrix &other) const = default;

   private:
    std::array<Complex, 4> m_;
};

/// Strong type for an average gate fidelity value (single qubit: [1/3, 1]).
struct Fidelity {
    double value;
    constexpr operator double() const {
        return value;
    }
};

/// Matrix product a * b.
constexpr UnitaryMatrix compose(const UnitaryMatrix &a, const UnitaryMatrix &b) {
    return UnitaryMatrix(a(0, 0) * b(0, 0) + a(0, 1) * b(1, 0), a(0, 0) * b(0, 1) + a(0, 1) * b(1, 1),
                         a(1, 0) * b(0, 0) + a(1, 1) * b(1, 0), a(1, 0) * b(0, 1) + a(1, 1) * b(1, 1));
}

/// Conjugate transpose.
constexpr UnitaryMatrix dagger(const UnitaryMatrix &u) {
    return UnitaryMatrix(std::conj(u(0, 0)), std::conj(u(1, 0)), std::conj(u(0, 1)), std::conj(u(1, 1)));
}

constexpr Complex trace(const UnitaryMatrix &u) {
    return u(0, 0) + u(1, 1);
}

constexpr Complex determinant(const UnitaryMatrix &u) {
    return u(0, 0) * u(1, 1) - u(0, 1) * u(1, 0);
}

/// Tr(u^dagger v) without forming the product.
constexpr Complex overlap_trace(const UnitaryMatrix &u, const UnitaryMatrix &v) {
    return std::conj(u(0, 0)) * v(0, 0) + std::conj(u(1, 0)) * v(1, 0) + std::conj(u(0, 1)) * v(0, 1) +
           std::conj(u(1, 1)) * v(1, 1);
}

/// Multiplies every entry by `factor` (use a unit-modulus factor for a global phase).
UnitaryMatrix scaled(const UnitaryMatrix &u, Complex factor);

/// max |(u^dagger u - I)_ij|.
double unitarity_error(const UnitaryMatrix &u);

/// max |a_ij - b_ij|.
double max_abs_diff(const UnitaryMatrix &a, const UnitaryMatrix &b);

/// Average gate fidelity, closed form (|Tr(u^dagger v)|^2 + d) / (d (d + 1)) with d = 2.
inline Fidelity agf(const UnitaryMatrix &u, const UnitaryMatrix &v) {
    return Fidelity{(std::norm(overlap_trace(u, v)) + 2.0) / 6.0};
}

/// 1 - agf(u, v), in [0, 2/3].
inline double distance(const UnitaryMatrix &u, const UnitaryMatrix &v) {
    return 1.0 - agf(u, v).value;
}

/// Nearest unitary in Frobenius norm (polar factor M (M^dagger M)^{-1/2}).
/// Throws DomainError for a singular matrix.
UnitaryMatrix nearest_unitary(const UnitaryMatrix &m);

/// Haar-random element of U(2): QR of a complex Ginibre matrix with the
/// diagonal phases of R folded into Q.
UnitaryMatrix haar_sample(RngStream &rng);

/// Haar-random pure state on C^2 (normalized complex Gaussian vector).
std::array<Complex, 2> haar_state(RngStream &rng);

/// "re00 im00 re01 im01 re10 im10 re11 im11", printed with round-trip precision.
std::string format_matrix(const UnitaryMatrix &u);

/// Parses the 8-float text form; ParseError on malformed text, ValidationError if not unitary.
UnitaryMatrix parse_matrix(std::string_view text);

}  // namespace rlqc
