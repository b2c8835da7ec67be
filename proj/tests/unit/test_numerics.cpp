#include "hatlab/numerics.hpp"
#include "oracle/oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace hatlab;

TEST_CASE("make_context accepts bits >= 16 and rejects smaller") {
  const PrecisionContext c = make_context(256, 32);
  CHECK(c.bits() == 256);
  CHECK(c.guard_bits() == 32);
  CHECK(c.working_bits() == 288);
  CHECK(make_context(16, 0).bits() == 16);
  CHECK_THROWS_WITH_AS(make_context(8, 0), doctest::Contains("precision too small"), std::invalid_argument);
  CHECK_THROWS_AS(make_context(64, -1), std::invalid_argument);
}

TEST_CASE("parse_scalar keeps exact rational tags") {
  const PrecisionContext ctx = make_context(256, 32);
  const Scalar half = parse_scalar("1/2", ctx);
  CHECK(half.value() == BigReal::from_double(0.5, 64));
  REQUIRE(half.has_exact());
  CHECK(half.exact_value()->coefficient == mpq_class(1, 2));
  CHECK_FALSE(half.exact_value()->times_pi);

  const Scalar quarter = parse_scalar("0.25", ctx);
  CHECK(quarter.value() == BigReal::from_double(0.25, 64));

  const Scalar third = parse_scalar("1/3", ctx);
  CHECK(third.value().precision() == 256);
  CHECK(identical(third.value(), BigReal::from_rational(mpq_class(1, 3), 256)));
  CHECK(third.exact_value()->coefficient == mpq_class(1, 3));

  const Scalar neg = parse_scalar("-3/4", ctx);
  CHECK(neg.exact_value()->coefficient == mpq_class(-3, 4));
  CHECK(parse_scalar("1.5e-3", ctx).exact_value()->coefficient == mpq_class(3, 2000));
}

TEST_CASE("parse_scalar accepts pi multiples") {
  const PrecisionContext ctx = make_context(128, 0);
  const Scalar p8 = parse_scalar("pi/8", ctx);
  CHECK(p8.exact_value()->times_pi);
  CHECK(p8.exact_value()->coefficient == mpq_class(1, 8));
  CHECK(oracle::rel_error(p8.value(), mul_2exp(BigReal::pi(128), -3)) == 0.0);
  CHECK(parse_scalar("3/4*pi", ctx).exact_value()->coefficient == mpq_class(3, 4));
  CHECK(parse_scalar("-pi", ctx).exact_value()->coefficient == -1);
}

TEST_CASE("parse_scalar rejects malformed text") {
  const PrecisionContext ctx = make_context(64, 0);
  for (const char* bad : {"", "abc", "1/0", "1//2", "1.2.3", "--1", "1/-2", "0x10", "1e", " 1"}) {
    CAPTURE(bad);
    CHECK_THROWS(parse_scalar(bad, ctx));
  }
}

TEST_CASE("format round-trips random values bit for bit") {
  std::mt19937_64 rng(20261017);
  gmp_randclass gen(gmp_randinit_default);
  gen.seed(7);
  for (mpfr_prec_t prec : {16, 53, 64, 113, 256, 288, 1000}) {
    for (int i = 0; i < 200; ++i) {
      BigReal x(prec);
      const mpz_class bits = gen.get_z_bits(prec);
      mpfr_set_z_2exp(x.get(), bits.get_mpz_t(), -prec, MPFR_RNDN);
      const long e = static_cast<long>(rng() % 4001) - 2000;
      x = mul_2exp(x, e);
      if (rng() & 1) x = -x;
      CAPTURE(format(x));
      CHECK(identical(parse_real(format(x), prec), x));
    }
  }
  CHECK(format(BigReal(64)) == "0");
  CHECK(format(BigReal::infinity(64)) == "inf");
  CHECK(format(BigReal::infinity(64, -1)) == "-inf");
}

TEST_CASE("exponent range reaches e^(2^20) and squares consistently") {
  const mpfr_prec_t prec = 288;
  const BigReal a = exp(BigReal(1L << 14, prec));
  const BigReal b = exp(BigReal(1L << 13, prec));
  CHECK(a.is_finite());
  CHECK(ulps(a - b * b, a, prec) <= 4.0);
  const BigReal big = exp(BigReal(1L << 20, prec));
  CHECK(big.is_finite());
  CHECK(std::fabs(big.log2_abs() - std::ldexp(1.0, 20) / std::log(2.0)) < 1e-6);
}

TEST_CASE("recomputing at twice the bits moves values by at most 2^(-bits+2)") {
  for (long bits : {64L, 128L, 256L}) {
    const BigReal third = BigReal::from_rational(mpq_class(1, 3), bits);
    const BigReal fine = BigReal::from_rational(mpq_class(1, 3), 2 * bits);
    for (const auto& [lo, hi] : {std::pair{exp(third), exp(fine)}, std::pair{sin(third), sin(fine)},
                                 std::pair{cos(third), cos(fine)}, std::pair{log(third), log(fine)}}) {
      CHECK(oracle::rel_error(lo, hi) <= std::ldexp(1.0, static_cast<int>(-bits + 2)));
    }
  }
}

TEST_CASE("complex arithmetic matches the schoolbook formulas") {
  const mpfr_prec_t prec = 200;
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<long> d(-1000, 1000);
  for (int i = 0; i < 100; ++i) {
    const BigComplex a(BigReal(d(rng), prec), BigReal(d(rng), prec));
    const BigComplex b(BigReal(d(rng), prec), BigReal(d(rng), prec));
    const BigComplex p = a * b;
    // small integers: exact
    CHECK(p.re == a.re * b.re - a.im * b.im);
    CHECK(p.im == a.re * b.im + a.im * b.re);
    if (!b.is_zero()) CHECK(oracle::rel_error((a / b) * b, a) < 1e-55);
  }
  const BigComplex z(BigReal(3, prec), BigReal(-5, prec));
  CHECK(identical(rotate_i(z, 1), BigComplex(BigReal(5, prec), BigReal(3, prec))));
  CHECK(identical(rotate_i(z, 2), -z));
  CHECK(identical(rotate_i(z, 4), z));
  CHECK(identical(rotate_i(z, -1), rotate_i(z, 3)));
}

TEST_CASE("TrackedSum reports bits consumed by cancellation") {
  const mpfr_prec_t prec = 300;
  TrackedSum sum(prec);
  sum.add(BigComplex(BigReal(1, prec)));
  sum.add(BigComplex(mul_2exp(BigReal(1, prec), -100) - BigReal(1, prec)));
  CHECK(sum.cancellation_bits() == doctest::Approx(100.0));
  CHECK(sum.max_partial() == BigReal(1, prec));

  TrackedSum zero(prec);
  zero.add(BigComplex(BigReal(2, prec)));
  zero.add(BigComplex(BigReal(-2, prec)));
  CHECK(zero.value().is_zero());
  CHECK(zero.cancellation_bits() == 0.0);
}

TEST_CASE("ulps measures residuals relative to a scale") {
  const mpfr_prec_t prec = 100;
  CHECK(ulps(mul_2exp(BigReal(1, prec), -60), BigReal(1, prec), 64) == doctest::Approx(16.0));
  CHECK(ulps(BigReal(prec), BigReal(prec), 64) == 0.0);
}
