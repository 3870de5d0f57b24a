#pragma once
#include "twogamma/config.hpp"
#include "twogamma/twophoton.hpp"
#include <string>
#include <vector>

namespace twogamma {

//! Shortest round-trip formatting with 17 significant digits ("%.17g").
std::string format_g17(double x);

//! One computed angular correlation with its run metadata.
struct CorrelationRecord {
  CorrelationResult result;
  //! theta in degrees as requested (result.theta holds radians)
  std::vector<double> theta_deg;
  TruncationMode mode{TruncationMode::full};
  double W90{0.0}; //!< W at 90 degrees, used for normalisation
  int basis_retries{0};
  TwoPhotonEngine::Diagnostics diagnostics;
  //! relative shifts from the optional convergence check (< 0: not run)
  double shift_lmax{-1.0};
  double shift_basis{-1.0};
};

struct RateRecord {
  TransitionSpec transition;
  TruncationMode mode{TruncationMode::full};
  RateResult rate;
  double transition_energy{0.0};
  std::string basis_fingerprint;
  int basis_retries{0};
  TwoPhotonEngine::Diagnostics diagnostics;
};

//! theta_deg, W_absolute, W_normalized_at_90deg; LF line endings
std::string correlation_csv(const CorrelationRecord &r);
//! y, dW_dy, weight
std::string rate_csv(const RateRecord &r);

//! provenance document; with_data embeds the table (json output format)
std::string correlation_json(const CorrelationRecord &r, const RunConfig &cfg,
                             bool with_data);
std::string rate_json(const RateRecord &r, const RunConfig &cfg,
                      bool with_data);

//! file stem, e.g. "W_Z92_1s2s-3S1_y0.5_full"
std::string correlation_stem(const CorrelationRecord &r);
std::string rate_stem(const RateRecord &r);

//! Write text to a file (binary mode, no newline translation). Throws
//! std::runtime_error.
void write_text(const std::string &path, const std::string &text);

} // namespace twogamma
