#pragma once

#include <span>
#include <vector>

#include "radpipe/param.hpp"

namespace radpipe {

/// Linear-chain CRF parameters over T tags. transitions(i, j) scores tag j
/// following tag i; start/end score the first and last tag of a path.
struct CrfParams {
  Param transitions;  // T x T
  Param start;        // T x 1
  Param end;          // T x 1
  int tags = 0;

  CrfParams() = default;
  explicit CrfParams(int tag_count)
      : transitions("crf.transitions", tag_count, tag_count),
        start("crf.start", tag_count, 1),
        end("crf.end", tag_count, 1),
        tags(tag_count) {}

  std::vector<Param*> params() { return {&transitions, &start, &end}; }
};

/// Allowed starts/ends/transitions for constrained decoding; forbidden
/// entries score -inf in Viterbi.
struct CrfMask {
  int tags = 0;
  std::vector<uint8_t> start_ok, end_ok;  // T
  std::vector<uint8_t> trans_ok;          // T*T, row-major [from*T + to]

  static CrfMask all_allowed(int tags);
};

/// log of the summed exp path scores (forward algorithm in log space).
/// Path score = start[y1] + sum emissions[t][yt] + sum transitions + end[yn].
/// Throws on an empty sequence.
double crf_log_partition(const CrfParams& crf, const Mat& emissions);

/// Per-position tag marginals (n x T), rows summing to 1.
Mat crf_marginals(const CrfParams& crf, const Mat& emissions);

/// Negative log-likelihood of the gold path. When d_emissions is non-null,
/// exact gradients (scaled by `scale`) are accumulated into the CRF params
/// and into d_emissions via forward-backward marginals.
double crf_nll(CrfParams& crf, const Mat& emissions, std::span<const int> gold,
               Mat* d_emissions = nullptr, double scale = 1.0);

/// Highest-scoring path; ties broken toward the lower tag id at each
/// backtrack step. Throws if every path is forbidden by the mask.
std::vector<int> crf_viterbi(const CrfParams& crf, const Mat& emissions,
                             const CrfMask* mask = nullptr);

/// The BIEOS validity mask over the 21 tags (built from the tagging rules).
const CrfMask& bieos_mask();

}  // namespace radpipe
