#include "thciz/rational.hpp"

#include <cctype>
#include <mutex>
#include <ostream>
#include <vector>

#include "thciz/errors.hpp"

namespace thciz {

ExactRational::ExactRational(long num, long den) {
  mpq_init(q_);
  if (den == 0) throw ValidationError("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  mpq_set_si(q_, num, static_cast<unsigned long>(den));
  mpq_canonicalize(q_);
}

ExactRational& ExactRational::operator/=(const ExactRational& o) {
  if (o.is_zero()) throw ValidationError("division by zero rational");
  mpq_div(q_, q_, o.q_);
  return *this;
}

ExactRational ExactRational::from_string(const std::string& text) {
  std::string s;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  }
  if (s.empty()) throw ValidationError("empty rational literal");
  auto check_int = [](const std::string& t) {
    if (t.empty()) return false;
    size_t i = (t[0] == '-' || t[0] == '+') ? 1 : 0;
    if (i == t.size()) return false;
    for (; i < t.size(); ++i) {
      if (!std::isdigit(static_cast<unsigned char>(t[i]))) return false;
    }
    return true;
  };
  const size_t slash = s.find('/');
  if (slash == std::string::npos) {
    if (!check_int(s)) throw ValidationError("malformed rational: " + text);
  } else {
    if (!check_int(s.substr(0, slash)) || !check_int(s.substr(slash + 1))) {
      throw ValidationError("malformed rational: " + text);
    }
  }
  ExactRational r;
  if (mpq_set_str(r.q_, s.c_str(), 10) != 0) {
    throw ValidationError("malformed rational: " + text);
  }
  if (mpz_sgn(mpq_denref(r.q_)) == 0) {
    throw ValidationError("rational with zero denominator: " + text);
  }
  mpq_canonicalize(r.q_);
  return r;
}

ExactRational ExactRational::factorial(unsigned long k) {
  static std::mutex mu;
  static std::vector<ExactRational> table;  // table[i] = i!
  std::lock_guard<std::mutex> lock(mu);
  if (table.empty()) table.push_back(ExactRational(1));
  while (table.size() <= k) {
    ExactRational next = table.back();
    mpz_t m;
    mpz_init_set_ui(m, static_cast<unsigned long>(table.size()));
    mpz_mul(mpq_numref(next.q_), mpq_numref(next.q_), m);
    mpz_clear(m);
    table.push_back(next);
  }
  return table[k];
}

ExactRational ExactRational::binomial(unsigned long n, unsigned long k) {
  if (k > n) return ExactRational(0);
  ExactRational r;
  mpz_bin_uiui(mpq_numref(r.q_), n, k);
  return r;
}

ExactRational ExactRational::catalan(unsigned long k) {
  return binomial(2 * k, k) / ExactRational(static_cast<long>(k) + 1);
}

ExactRational ExactRational::ipow(long base, long exp) {
  if (base == 0 && exp < 0) throw ValidationError("0 to a negative power");
  ExactRational r(1);
  if (exp == 0) return r;
  const unsigned long mag =
      exp > 0 ? static_cast<unsigned long>(exp)
              : static_cast<unsigned long>(-(exp + 1)) + 1UL;
  mpz_t b;
  mpz_init_set_si(b, base);
  mpz_pow_ui(mpq_numref(r.q_), b, mag);
  mpz_clear(b);
  mpq_canonicalize(r.q_);
  if (exp < 0) mpq_inv(r.q_, r.q_);
  return r;
}

ExactRational ExactRational::pow(long e) const {
  if (e == 0) return ExactRational(1);
  if (is_zero() && e < 0) throw ValidationError("0 to a negative power");
  ExactRational base = *this;
  if (e < 0) {
    mpq_inv(base.q_, base.q_);
    e = -e;
  }
  ExactRational acc(1);
  while (e > 0) {
    if (e & 1) acc *= base;
    base *= base;
    e >>= 1;
  }
  return acc;
}

namespace {

std::string mpz_to_string(const mpz_t z) {
  char* raw = mpz_get_str(nullptr, 10, z);
  std::string s(raw);
  void (*freefn)(void*, size_t);
  mp_get_memory_functions(nullptr, nullptr, &freefn);
  freefn(raw, s.size() + 1);
  return s;
}

}  // namespace

std::string ExactRational::str() const {
  char* raw = mpq_get_str(nullptr, 10, q_);
  std::string s(raw);
  void (*freefn)(void*, size_t);
  mp_get_memory_functions(nullptr, nullptr, &freefn);
  freefn(raw, s.size() + 1);
  return s;
}

std::string ExactRational::num_str() const { return mpz_to_string(mpq_numref(q_)); }

std::string ExactRational::den_str() const { return mpz_to_string(mpq_denref(q_)); }

std::ostream& operator<<(std::ostream& os, const ExactRational& r) {
  return os << r.str();
}

}  // namespace thciz
