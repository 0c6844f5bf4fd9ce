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

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "rlqc/errors.hpp"
#include "rlqc/gateset.hpp"
#include "rlqc/unitary.hpp"
#include "test_helpers.hpp"

using namespace rlqc;
using rlqc::testing::v1;
using rlqc::testing::v2;
using rlqc::testing::v3;

TEST_CASE("compose") {
    CHECK(compose(UnitaryMatrix::identity(), UnitaryMatrix::identity()) == UnitaryMatrix::identity());

    // V2 * V2 = (1/5) [[-3, 4], [-4, -3]]
    const UnitaryMatrix sq = compose(v2(), v2());
    const UnitaryMatrix expect{Complex(-0.6, 0), Complex(0.8, 0), Complex(-0.8, 0), Complex(-0.6, 0)};
    CHECK(max_abs_diff(sq, expect) < 1e-15);

    const UnitaryMatrix a = compose(rotation(Axis::Z, 0.3), rotation(Axis::Z, 1.1));
    CHECK(max_abs_diff(a, rotation(Axis::Z, 1.4)) < 1e-15);
}

TEST_CASE("dagger") {
    CHECK(dagger(UnitaryMatrix::identity()) == UnitaryMatrix::identity());
    const UnitaryMatrix d = dagger(v3());
    const double s = rlqc::testing::kInvSqrt5;
    CHECK(max_abs_diff(d, UnitaryMatrix(Complex(s, -2 * s), 0, 0, Complex(s, 2 * s))) == 0.0);
    CHECK(max_abs_diff(compose(dagger(v1()), v1()), UnitaryMatrix::identity()) < 1e-12);

    RngStream rng(4);
    for (int i = 0; i < 20; ++i) {
        const UnitaryMatrix u = haar_sample(rng);
        CHECK(dagger(dagger(u)) == u);
    }
}

TEST_CASE("agf closed form values") {
    RngStream rng(9);
    const UnitaryMatrix u = haar_sample(rng);
    CHECK(agf(u, u).value == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(agf(UnitaryMatrix::identity(), v3()) - 7.0 / 15.0) < 1e-12);
    CHECK(std::abs(agf(UnitaryMatrix::identity(), rotation(Axis::X, std::numbers::pi)) - 1.0 / 3.0) < 1e-12);
}

TEST_CASE("agf symmetry, range and phase invariance") {
    RngStream rng(11);
    for (int i = 0; i < 1000; ++i) {
        const UnitaryMatrix u = haar_sample(rng);
        const UnitaryMatrix v = haar_sample(rng);
        const double phi = 2 * std::numbers::pi * rng.uniform();
        const double f = agf(u, v);
        CHECK(std::abs(f - agf(v, u)) < 1e-15);
        CHECK(f >= 1.0 / 3.0 - 1e-12);
        CHECK(f <= 1.0 + 1e-12);
        CHECK(std::abs(f - agf(u, scaled(v, std::polar(1.0, phi)))) < 1e-12);
    }
}

TEST_CASE("distance") {
    RngStream rng(3);
    const UnitaryMatrix u = haar_sample(rng);
    CHECK(std::abs(distance(u, u)) < 1e-15);
    CHECK(std::abs(distance(UnitaryMatrix::identity(), v3()) - 8.0 / 15.0) < 1e-12);
    CHECK(std::abs(distance(u, scaled(u, std::polar(1.0, 0.77)))) < 1e-15);
    for (int i = 0; i < 200; ++i) {
        const double d = distance(haar_sample(rng), haar_sample(rng));
        CHECK(d >= -1e-12);
        CHECK(d <= 2.0 / 3.0 + 1e-12);
    }
}

TEST_CASE("haar_sample is unitary and deterministic") {
    RngStream a(42);
    RngStream b(42);
    for (int i = 0; i < 1000; ++i) {
        const UnitaryMatrix u = haar_sample(a);
        CHECK(unitarity_error(u) < 1e-12);
        CHECK(u == haar_sample(b));
    }
}

TEST_CASE("haar_sample moments (small sample)") {
    RngStream rng(5);
    const int n = 100000;
    Complex mean = 0;
    double sq = 0;
    for (int i = 0; i < n; ++i) {
        const Complex t = trace(haar_sample(rng));
        mean += t;
        sq += std::norm(t);
    }
    mean /= n;
    sq /= n;
    // std of |Tr|^2 is 1 for Haar U(2), so 5 sigma at 1e5 samples is ~0.016.
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(sq - 1.0) < 0.02);
}

TEST_CASE("haar_state is normalized") {
    RngStream rng(1);
    for (int i = 0; i < 100; ++i) {
        const auto s = haar_state(rng);
        CHECK(std::abs(std::norm(s[0]) + std::norm(s[1]) - 1.0) < 1e-14);
    }
}

TEST_CASE("checked construction") {
    CHECK_THROWS_AS(UnitaryMatrix::checked(1, 1, 0, 1), ValidationError);
    CHECK_NOTHROW(UnitaryMatrix::checked(0, 1, 1, 0));
}

TEST_CASE("nearest_unitary") {
    RngStream rng(8);
    const UnitaryMatrix u = haar_sample(rng);
    CHECK(max_abs_diff(nearest_unitary(u), u) < 1e-14);
    UnitaryMatrix noisy = u;
    noisy(0, 1) += Complex(1e-6, -2e-6);
    const UnitaryMatrix p = nearest_unitary(noisy);
    CHECK(unitarity_error(p) < 1e-14);
    CHECK(max_abs_diff(p, u) < 1e-5);
    // A scalar multiple of a unitary projects onto that unitary.
    CHECK(max_abs_diff(nearest_unitary(scaled(u, 2.5)), u) < 1e-14);
    CHECK_THROWS_AS(nearest_unitary(UnitaryMatrix(1, 1, 1, 1)), DomainError);
}

TEST_CASE("matrix text format") {
    RngStream rng(2);
    const UnitaryMatrix u = haar_sample(rng);
    CHECK(parse_matrix(format_matrix(u)) == u);
    CHECK(parse_matrix("1 0 0 0 0 0 1 0") == UnitaryMatrix::identity());
    CHECK(parse_matrix("  1 0\n0 0\t0 0 1 0 \n") == UnitaryMatrix::identity());
    CHECK_THROWS_AS(parse_matrix("1 0 0 0 0 0 1"), ParseError);
    CHECK_THROWS_AS(parse_matrix("1 0 0 0 0 0 1 0 5"), ParseError);
    CHECK_THROWS_AS(parse_matrix("1 0 0 0 0 0 1 x"), ParseError);
    CHECK_THROWS_AS(parse_matrix("1 0 1 0 0 0 1 0"), ValidationError);
}

TEST_CASE("reals round trip") {
    RngStream rng(6);
    const UnitaryMatrix u = haar_sample(rng);
    const auto r = u.to_reals();
    CHECK(r[0] == u(0, 0).real());
    CHECK(r[1] == u(0, 0).imag());
    CHECK(r[6] == u(1, 1).real());
    CHECK(UnitaryMatrix::from_reals(r) == u);
}

TEST_CASE("rng streams") {
    RngStream a(7);
    RngStream b(7);
    for (int i = 0; i < 100; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }
    RngStream c(7);
    RngStream s1 = c.split(1);
    RngStream s2 = c.split(2);
    CHECK(s1.next_u64() != s2.next_u64());
    CHECK(c.split(1).next_u64() == RngStream(7).split(1).next_u64());

    RngStream u(3);
    int counts[5] = {};
    for (int i = 0; i < 50000; ++i) {
        const auto k = u.uniform_int(5);
        REQUIRE(k < 5);
        ++counts[k];
    }
    for (int k : counts) {
        CHECK(std::abs(k - 10000) < 5 * std::sqrt(50000 * 0.2 * 0.8));
    }
    double m = 0, v = 0;
    for (int i = 0; i < 100000; ++i) {
        const double x = u.normal();
        m += x;
        v += x * x;
    }
    CHECK(std::abs(m / 1e5) < 0.02);
    CHECK(std::abs(v / 1e5 - 1.0) < 0.03);
}
