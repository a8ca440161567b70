#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "semharq/bitstring.hpp"

namespace semharq {

// ---------------------------------------------------------------------------
// GF(2^m) arithmetic, table driven, generator element 2.
// ---------------------------------------------------------------------------

class GaloisField {
 public:
  GaloisField(int m, uint32_t primitive_poly) : m_(m), q_(1 << m) {
    exp_.resize(2 * (q_ - 1));
    log_.assign(q_, -1);
    int x = 1;
    for (int i = 0; i < q_ - 1; ++i) {
      exp_[i] = x;
      log_[x] = i;
      x <<= 1;
      if (x & q_) x ^= static_cast<int>(primitive_poly);
    }
    if (x != 1) throw std::invalid_argument("polynomial is not primitive");
    for (int i = q_ - 1; i < 2 * (q_ - 1); ++i) exp_[i] = exp_[i - (q_ - 1)];
  }

  int m() const { return m_; }
  int size() const { return q_; }
  int order() const { return q_ - 1; }  // multiplicative order

  int add(int a, int b) const { return a ^ b; }

  int mul(int a, int b) const {
    if (a == 0 || b == 0) return 0;
    return exp_[log_[a] + log_[b]];
  }

  int inv(int a) const {
    if (a == 0) throw std::domain_error("inverse of zero");
    return exp_[q_ - 1 - log_[a]];
  }

  int div(int a, int b) const { return mul(a, inv(b)); }

  // alpha^e for any integer exponent.
  int alpha_pow(int e) const {
    int r = e % order();
    if (r < 0) r += order();
    return exp_[r];
  }

  int log(int a) const {
    if (a == 0) throw std::domain_error("log of zero");
    return log_[a];
  }

  // Horner evaluation of poly[0] + poly[1] x + ... at x.
  int poly_eval(const std::vector<int>& poly, int x) const {
    int acc = 0;
    for (size_t i = poly.size(); i-- > 0;) acc = add(mul(acc, x), poly[i]);
    return acc;
  }

 private:
  int m_;
  int q_;
  std::vector<int> exp_;
  std::vector<int> log_;
};

inline const GaloisField& gf8() {
  static const GaloisField f(3, 0xB);  // x^3 + x + 1
  return f;
}

inline const GaloisField& gf16() {
  static const GaloisField f(4, 0x13);  // x^4 + x + 1
  return f;
}

inline const GaloisField& gf256() {
  static const GaloisField f(8, 0x11D);  // x^8 + x^4 + x^3 + x^2 + 1
  return f;
}

// ---------------------------------------------------------------------------
// Systematic RS(n, k) with generator roots alpha^1 .. alpha^(n-k).
// Codeword symbol i carries the coefficient of x^(n-1-i), so the message
// occupies positions 0..k-1 and parity the trailing positions.
// ---------------------------------------------------------------------------

struct RsCodeSpec {
  const GaloisField* field;
  int n;
  int k;
  std::vector<int> generator;  // g[0] + g[1] x + ... lowest degree first

  int parity() const { return n - k; }
};

inline RsCodeSpec make_rs(const GaloisField& field, int n, int k) {
  if (!(0 < k && k < n && n <= field.order()))
    throw std::invalid_argument("invalid (n, k) for field");
  RsCodeSpec spec{&field, n, k, {1}};
  for (int j = 1; j <= n - k; ++j) {
    // generator *= (x - alpha^j)
    std::vector<int> next(spec.generator.size() + 1, 0);
    int root = field.alpha_pow(j);
    for (size_t i = 0; i < spec.generator.size(); ++i) {
      next[i + 1] ^= spec.generator[i];
      next[i] ^= field.mul(spec.generator[i], root);
    }
    spec.generator = std::move(next);
  }
  return spec;
}

struct Codeword {
  std::vector<int> symbols;  // length n
  int punctured_to;          // effective length n' <= n

  std::vector<int> transmitted() const {
    return std::vector<int>(symbols.begin(), symbols.begin() + punctured_to);
  }
};

inline Codeword rs_encode(const std::vector<int>& message, const RsCodeSpec& spec) {
  if (static_cast<int>(message.size()) != spec.k)
    throw std::invalid_argument("message length mismatch");
  const GaloisField& f = *spec.field;
  for (int s : message)
    if (s < 0 || s >= f.size()) throw std::invalid_argument("symbol out of field range");

  // Long division of m(x) x^(n-k) by g(x); remainder is the parity.
  std::vector<int> rem(spec.parity(), 0);
  for (int i = 0; i < spec.k; ++i) {
    int feedback = f.add(message[i], rem[spec.parity() - 1]);
    for (int j = spec.parity() - 1; j > 0; --j)
      rem[j] = f.add(rem[j - 1], f.mul(feedback, spec.generator[j]));
    rem[0] = f.mul(feedback, spec.generator[0]);
  }

  Codeword cw;
  cw.symbols = message;
  for (int j = spec.parity() - 1; j >= 0; --j) cw.symbols.push_back(rem[j]);
  cw.punctured_to = spec.n;
  return cw;
}

// Withholds the trailing n - n' parity symbols.
inline Codeword rs_puncture(const Codeword& cw, int n_prime, const RsCodeSpec& spec) {
  if (n_prime <= spec.k) throw std::invalid_argument("rate above 1");
  if (n_prime > spec.n) throw std::invalid_argument("puncture beyond length");
  Codeword out = cw;
  out.punctured_to = n_prime;
  return out;
}

// Received word for decoding: `symbols` holds the first n' positions (the
// rest were withheld by puncturing and are treated as erasures), `erased`
// flags channel erasures among them.
struct RsReceived {
  std::vector<int> symbols;
  std::vector<uint8_t> erased;  // same length as symbols; optional (empty = none)
};

// Errors-and-erasures decoding: syndromes, Berlekamp-Massey with erasure
// initialization, Chien search, Forney values. Returns the k message symbols
// or nullopt on decode failure. Miscorrection beyond capability is possible,
// as with any bounded-distance RS decoder.
inline std::optional<std::vector<int>> rs_decode(const RsReceived& received,
                                                 const RsCodeSpec& spec) {
  const GaloisField& f = *spec.field;
  const int n = spec.n;
  const int nk = spec.parity();
  const int n_prime = static_cast<int>(received.symbols.size());
  if (n_prime < spec.k || n_prime > n) throw std::invalid_argument("bad received length");
  if (!received.erased.empty() &&
      received.erased.size() != received.symbols.size())
    throw std::invalid_argument("erasure flag length mismatch");

  // Full-length word: withheld trailing positions become zero-filled erasures.
  std::vector<int> word(n, 0);
  std::vector<int> erasure_degrees;  // polynomial degrees of erased positions
  for (int i = 0; i < n; ++i) {
    bool erased = i >= n_prime || (!received.erased.empty() && received.erased[i]);
    if (i < n_prime) word[i] = erased ? 0 : received.symbols[i];
    if (erased) erasure_degrees.push_back(n - 1 - i);
  }
  const int f_count = static_cast<int>(erasure_degrees.size());
  if (f_count > nk) return std::nullopt;  // beyond even erasure-only capability

  // Syndromes S_j = r(alpha^j), j = 1..n-k.
  std::vector<int> synd(nk, 0);
  bool all_zero = true;
  for (int j = 1; j <= nk; ++j) {
    int x = f.alpha_pow(j);
    int acc = 0;
    for (int i = 0; i < n; ++i) acc = f.add(f.mul(acc, x), word[i]);
    synd[j - 1] = acc;
    if (acc != 0) all_zero = false;
  }
  if (all_zero)
    return std::vector<int>(word.begin(), word.begin() + spec.k);

  // Erasure locator Gamma(x) = prod (1 - alpha^deg x).
  std::vector<int> lambda{1};
  for (int deg : erasure_degrees) {
    int loc = f.alpha_pow(deg);
    std::vector<int> next(lambda.size() + 1, 0);
    for (size_t i = 0; i < lambda.size(); ++i) {
      next[i] ^= lambda[i];
      next[i + 1] ^= f.mul(lambda[i], loc);
    }
    lambda = std::move(next);
  }

  // Berlekamp-Massey seeded with the erasure locator. T(x) = L(x) + d x B(x);
  // on a length change B absorbs L/d, otherwise B picks up another factor x.
  std::vector<int> prev = lambda;  // B(x)
  int el = f_count;
  for (int r = f_count + 1; r <= nk; ++r) {
    int discr = 0;
    for (int i = 0; i < r && i < static_cast<int>(lambda.size()); ++i)
      discr = f.add(discr, f.mul(lambda[i], synd[r - 1 - i]));
    if (discr == 0) {
      prev.insert(prev.begin(), 0);  // B <- x B
    } else {
      std::vector<int> t(std::max(lambda.size(), prev.size() + 1), 0);
      for (size_t i = 0; i < lambda.size(); ++i) t[i] ^= lambda[i];
      for (size_t i = 0; i < prev.size(); ++i) t[i + 1] ^= f.mul(prev[i], discr);
      if (2 * el <= r + f_count - 1) {
        el = r + f_count - el;
        int scale = f.inv(discr);
        prev.assign(lambda.size(), 0);
        for (size_t i = 0; i < lambda.size(); ++i) prev[i] = f.mul(lambda[i], scale);
      } else {
        prev.insert(prev.begin(), 0);  // B <- x B
      }
      lambda = std::move(t);
    }
  }
  while (!lambda.empty() && lambda.back() == 0) lambda.pop_back();
  int deg_lambda = static_cast<int>(lambda.size()) - 1;
  if (deg_lambda < 0 || deg_lambda > nk) return std::nullopt;

  // Chien search over codeword positions.
  std::vector<int> error_degrees;
  for (int deg = 0; deg < n; ++deg) {
    int x_inv = f.alpha_pow(-deg);
    if (f.poly_eval(lambda, x_inv) == 0) error_degrees.push_back(deg);
  }
  if (static_cast<int>(error_degrees.size()) != deg_lambda) return std::nullopt;

  // Omega(x) = S(x) Lambda(x) mod x^(n-k).
  std::vector<int> omega(nk, 0);
  for (int i = 0; i < nk; ++i) {
    int acc = 0;
    for (int j = 0; j <= i && j < static_cast<int>(lambda.size()); ++j)
      acc = f.add(acc, f.mul(lambda[j], synd[i - j]));
    omega[i] = acc;
  }

  // Formal derivative of Lambda (char 2: odd-degree terms survive).
  std::vector<int> lambda_deriv;
  for (size_t i = 1; i < lambda.size(); i += 2) {
    lambda_deriv.resize(i, 0);
    lambda_deriv[i - 1] = lambda[i];
  }

  std::vector<int> corrected = word;
  for (int deg : error_degrees) {
    int x_inv = f.alpha_pow(-deg);
    int denom = f.poly_eval(lambda_deriv, x_inv);
    if (denom == 0) return std::nullopt;
    int value = f.div(f.poly_eval(omega, x_inv), denom);
    corrected[n - 1 - deg] = f.add(corrected[n - 1 - deg], value);
  }

  // Re-check syndromes on the corrected word.
  for (int j = 1; j <= nk; ++j) {
    int x = f.alpha_pow(j);
    int acc = 0;
    for (int i = 0; i < n; ++i) acc = f.add(f.mul(acc, x), corrected[i]);
    if (acc != 0) return std::nullopt;
  }
  return std::vector<int>(corrected.begin(), corrected.begin() + spec.k);
}

// ---------------------------------------------------------------------------
// Bit payload <-> RS message blocks. Layout: 16-bit big-endian bit-length
// header, payload bits, zero padding to a multiple of k*m bits; symbols are
// packed m bits each, MSB first.
// ---------------------------------------------------------------------------

inline std::vector<std::vector<int>> block_map(const BitString& payload, const RsCodeSpec& spec) {
  if (payload.size() >= (1u << 16)) throw std::invalid_argument("frame too long");
  const int m = spec.field->m();
  BitString framed;
  for (int i = 15; i >= 0; --i) framed.push_back((payload.size() >> i) & 1U);
  framed.append(payload);
  const size_t block_bits = static_cast<size_t>(spec.k) * m;
  while (framed.size() % block_bits != 0) framed.push_back(0);

  std::vector<std::vector<int>> blocks;
  size_t pos = 0;
  while (pos < framed.size()) {
    std::vector<int> block(spec.k, 0);
    for (int s = 0; s < spec.k; ++s) {
      int symbol = 0;
      for (int b = 0; b < m; ++b) symbol = (symbol << 1) | framed[pos++];
      block[s] = symbol;
    }
    blocks.push_back(std::move(block));
  }
  return blocks;
}

// Inverse of block_map. Returns nullopt when the recovered header does not
// fit the available bits (corrupted length field).
inline std::optional<BitString> block_unmap(const std::vector<std::vector<int>>& blocks,
                                            const RsCodeSpec& spec) {
  const int m = spec.field->m();
  BitString all;
  for (const auto& block : blocks) {
    if (static_cast<int>(block.size()) != spec.k) throw std::invalid_argument("bad block size");
    for (int symbol : block)
      for (int b = m - 1; b >= 0; --b) all.push_back((symbol >> b) & 1U);
  }
  if (all.size() < 16) return std::nullopt;
  size_t length = 0;
  for (int i = 0; i < 16; ++i) length = (length << 1) | all[i];
  if (16 + length > all.size()) return std::nullopt;
  return all.slice(16, 16 + length);
}

// Expected block count for a payload of `payload_bits` bits.
inline size_t block_count_for_bits(size_t payload_bits, const RsCodeSpec& spec) {
  const size_t block_bits = static_cast<size_t>(spec.k) * spec.field->m();
  return (16 + payload_bits + block_bits - 1) / block_bits;
}

}  // namespace semharq
