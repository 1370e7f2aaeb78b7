#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "isolab/params.hpp"

namespace isolab {

enum class MeasureTag { MuPN, VPN, RejectionVPN };

std::string_view to_string(MeasureTag tag);

/// Points drawn from a named measure, stored row-major (count x dim).
/// Chunk k of the batch is generated from derive_seed(seed, k), so the
/// content depends on (params, count, seed, chunk_size) and not on the
/// number of worker threads.
struct SampleBatch {
  MeasureTag tag = MeasureTag::VPN;
  PBallParams params;
  std::size_t dim = 0;
  std::size_t count = 0;
  std::uint64_t seed = 0;
  std::size_t chunk_size = 0;
  std::uint64_t proposals = 0;  // rejection proposals; equals count otherwise
  std::vector<double> points;

  std::span<const double> row(std::size_t i) const {
    return {points.data() + i * dim, dim};
  }
  /// Column j copied out.
  std::vector<double> column(std::size_t j) const;
};

struct SamplingOptions {
  std::size_t chunk_size = 4096;
  unsigned threads = 1;
};

/// mu_p^{(x)n} (x) nu_p on R^{n+1}. Coordinates 1..n are S G^{1/p} with
/// G ~ Gamma(1/p, 1) and S a fair sign; coordinate n+1 is E^{1/p} with
/// E ~ Exp(1).
SampleBatch sample_product(const PBallParams& params, std::size_t count, std::uint64_t seed,
                           const SamplingOptions& options = {});

/// T(z) = x / ||z||_p for z = (x, y) in R^{n+1}. Throws SingularInputError on z = 0.
std::vector<double> bgmn_map(std::span<const double> z, double p);
void bgmn_map_into(std::span<const double> z, double p, std::span<double> out);

/// Uniform measure on B_p^n: sample_product pushed through T.
SampleBatch sample_ball(const PBallParams& params, std::size_t count, std::uint64_t seed,
                        const SamplingOptions& options = {});

/// Applies T row by row to a MuPN batch, keeping seed and chunk metadata.
SampleBatch push_forward(const SampleBatch& product);

/// Expected acceptance rate Vol(B_p^n) / 2^n of the cube rejection sampler.
double rejection_acceptance_rate(const PBallParams& params);

/// Exact uniform sampler: points uniform in [-1,1]^n kept when ||x||_p <= 1.
/// Requires n <= 10; throws CapacityError when the acceptance rate is
/// below 1e-6.
SampleBatch rejection_sample_ball(const PBallParams& params, std::size_t count,
                                  std::uint64_t seed, const SamplingOptions& options = {});

/// CSV with header x1,...,xd and one shortest round-trip row per sample.
void write_csv(const SampleBatch& batch, std::ostream& out);

using BatchSampler = std::function<SampleBatch(std::size_t count, std::uint64_t seed)>;

BatchSampler ball_sampler(const PBallParams& params, const SamplingOptions& options = {});
BatchSampler product_sampler(const PBallParams& params, const SamplingOptions& options = {});
BatchSampler rejection_sampler(const PBallParams& params, const SamplingOptions& options = {});

}  // namespace isolab
