#pragma once

#include <mpfr.h>

namespace qsalg {

// Working precision for certified-interval arithmetic. Exact scalars ignore
// it; intervals created from exact values are materialized at this precision.
inline mpfr_prec_t& ambient_precision() {
  thread_local mpfr_prec_t prec = 256;
  return prec;
}

inline constexpr mpfr_prec_t kMaxPrecision = 8192;

class ScopedPrecision {
 public:
  explicit ScopedPrecision(mpfr_prec_t prec) : saved_(ambient_precision()) {
    ambient_precision() = prec;
  }
  ~ScopedPrecision() { ambient_precision() = saved_; }
  ScopedPrecision(const ScopedPrecision&) = delete;
  ScopedPrecision& operator=(const ScopedPrecision&) = delete;

 private:
  mpfr_prec_t saved_;
};

}  // namespace qsalg
