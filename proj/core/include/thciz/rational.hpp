#pragma once

#include <gmp.h>

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <string>

namespace thciz {

// Arbitrary precision rational number, always kept in canonical form
// (fully reduced, positive denominator). Thin RAII wrapper over GMP mpq_t.
class ExactRational {
 public:
  ExactRational() { mpq_init(q_); }
  ExactRational(long value) {  // NOLINT: implicit by design
    mpq_init(q_);
    mpq_set_si(q_, value, 1);
  }
  ExactRational(long num, long den);
  ExactRational(const ExactRational& other) {
    mpq_init(q_);
    mpq_set(q_, other.q_);
  }
  ExactRational(ExactRational&& other) noexcept {
    mpq_init(q_);
    mpq_swap(q_, other.q_);
  }
  ExactRational& operator=(const ExactRational& other) {
    if (this != &other) mpq_set(q_, other.q_);
    return *this;
  }
  ExactRational& operator=(ExactRational&& other) noexcept {
    mpq_swap(q_, other.q_);
    return *this;
  }
  ~ExactRational() { mpq_clear(q_); }

  // Parses "p" or "p/q" in base 10. Throws ValidationError on malformed
  // input or zero denominator.
  static ExactRational from_string(const std::string& text);

  // k! as an exact integer. Backed by a thread safe memoised table.
  static ExactRational factorial(unsigned long k);
  // Binomial coefficient C(n, k); zero when k > n.
  static ExactRational binomial(unsigned long n, unsigned long k);
  // Catalan number C(2k, k) / (k + 1).
  static ExactRational catalan(unsigned long k);
  // base^exp with integer base and possibly negative exponent.
  // Throws ValidationError for 0 raised to a negative power.
  static ExactRational ipow(long base, long exp);

  ExactRational& operator+=(const ExactRational& o) {
    mpq_add(q_, q_, o.q_);
    return *this;
  }
  ExactRational& operator-=(const ExactRational& o) {
    mpq_sub(q_, q_, o.q_);
    return *this;
  }
  ExactRational& operator*=(const ExactRational& o) {
    mpq_mul(q_, q_, o.q_);
    return *this;
  }
  ExactRational& operator/=(const ExactRational& o);

  friend ExactRational operator+(ExactRational a, const ExactRational& b) {
    a += b;
    return a;
  }
  friend ExactRational operator-(ExactRational a, const ExactRational& b) {
    a -= b;
    return a;
  }
  friend ExactRational operator*(ExactRational a, const ExactRational& b) {
    a *= b;
    return a;
  }
  friend ExactRational operator/(ExactRational a, const ExactRational& b) {
    a /= b;
    return a;
  }

  ExactRational operator-() const {
    ExactRational r;
    mpq_neg(r.q_, q_);
    return r;
  }

  bool operator==(const ExactRational& o) const {
    return mpq_equal(q_, o.q_) != 0;
  }
  std::strong_ordering operator<=>(const ExactRational& o) const {
    const int c = mpq_cmp(q_, o.q_);
    if (c < 0) return std::strong_ordering::less;
    if (c > 0) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

  // this^e; e may be negative (throws ValidationError on inverting zero).
  ExactRational pow(long e) const;

  int sign() const { return mpq_sgn(q_); }
  bool is_zero() const { return mpq_sgn(q_) == 0; }
  bool is_integer() const { return mpz_cmp_ui(mpq_denref(q_), 1) == 0; }
  ExactRational abs() const {
    ExactRational r;
    mpq_abs(r.q_, q_);
    return r;
  }

  double to_double() const { return mpq_get_d(q_); }
  // Canonical text form: "p" for integers, otherwise "p/q".
  std::string str() const;
  std::string num_str() const;
  std::string den_str() const;

 private:
  mpq_t q_;
};

std::ostream& operator<<(std::ostream& os, const ExactRational& r);

}  // namespace thciz
