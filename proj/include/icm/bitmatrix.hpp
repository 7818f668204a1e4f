// Packed boolean matrices for walk-existence queries.
#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace icm {

/// Square boolean matrix with rows packed into 64-bit words. Multiplication is
/// over the (OR, AND) semiring: (A*B)(i,j) = OR_k A(i,k) AND B(k,j).
class BitMatrix {
 public:
  using Word = std::uint64_t;
  static constexpr std::size_t kBits = 64;

  BitMatrix() = default;
  explicit BitMatrix(std::size_t n) : n_(n), words_((n + kBits - 1) / kBits), bits_(n * words_, 0) {}

  static BitMatrix identity(std::size_t n) {
    BitMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i);
    return m;
  }

  std::size_t size() const noexcept { return n_; }
  std::size_t words_per_row() const noexcept { return words_; }

  void set(std::size_t i, std::size_t j) { bits_[i * words_ + j / kBits] |= Word{1} << (j % kBits); }
  bool test(std::size_t i, std::size_t j) const { return (bits_[i * words_ + j / kBits] >> (j % kBits)) & 1U; }

  const Word* row(std::size_t i) const { return bits_.data() + i * words_; }
  Word* row(std::size_t i) { return bits_.data() + i * words_; }

  bool all_ones() const {
    if (n_ == 0) return true;
    const std::size_t tail = n_ % kBits;
    const Word last = tail == 0 ? ~Word{0} : (Word{1} << tail) - 1;
    for (std::size_t i = 0; i < n_; ++i) {
      const Word* r = row(i);
      for (std::size_t w = 0; w + 1 < words_; ++w)
        if (r[w] != ~Word{0}) return false;
      if (r[words_ - 1] != last) return false;
    }
    return true;
  }

  std::size_t count() const {
    std::size_t c = 0;
    for (Word w : bits_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }

  friend BitMatrix operator*(const BitMatrix& a, const BitMatrix& b) {
    const std::size_t n = a.n_;
    const std::size_t words = a.words_;
    BitMatrix c(n);
    for (std::size_t i = 0; i < n; ++i) {
      Word* ci = c.row(i);
      const Word* ai = a.row(i);
      for (std::size_t w = 0; w < words; ++w) {
        Word bits = ai[w];
        while (bits != 0) {
          const std::size_t k = w * kBits + static_cast<std::size_t>(std::countr_zero(bits));
          bits &= bits - 1;
          const Word* bk = b.row(k);
          for (std::size_t x = 0; x < words; ++x) ci[x] |= bk[x];
        }
      }
    }
    return c;
  }

  friend bool operator==(const BitMatrix&, const BitMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::size_t words_ = 0;
  std::vector<Word> bits_;
};

/// Row vector of bits, multiplied on the right by a BitMatrix.
class BitRow {
 public:
  using Word = BitMatrix::Word;

  explicit BitRow(std::size_t n) : n_(n), bits_((n + BitMatrix::kBits - 1) / BitMatrix::kBits, 0) {}

  void set(std::size_t j) { bits_[j / BitMatrix::kBits] |= Word{1} << (j % BitMatrix::kBits); }
  bool test(std::size_t j) const { return (bits_[j / BitMatrix::kBits] >> (j % BitMatrix::kBits)) & 1U; }
  bool none() const {
    for (Word w : bits_)
      if (w != 0) return false;
    return true;
  }

  BitRow times(const BitMatrix& m) const {
    BitRow out(n_);
    for (std::size_t w = 0; w < bits_.size(); ++w) {
      Word bits = bits_[w];
      while (bits != 0) {
        const std::size_t k = w * BitMatrix::kBits + static_cast<std::size_t>(std::countr_zero(bits));
        bits &= bits - 1;
        const Word* mk = m.row(k);
        for (std::size_t x = 0; x < bits_.size(); ++x) out.bits_[x] |= mk[x];
      }
    }
    return out;
  }

 private:
  std::size_t n_;
  std::vector<Word> bits_;
};

}  // namespace icm
