#include "isolab/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <thread>

#include "isolab/errors.hpp"
#include "isolab/format.hpp"
#include "isolab/geometry.hpp"
#include "isolab/rng.hpp"

namespace isolab {
namespace {

constexpr double kMinAcceptance = 1e-6;

// Calls fill(chunk_index, first_row, rows) for every chunk, spreading chunks
// over `threads` workers. Chunks write disjoint row ranges.
template <typename Fill>
void for_each_chunk(std::size_t count, std::size_t chunk_size, unsigned threads, Fill&& fill) {
  const std::size_t chunks = (count + chunk_size - 1) / chunk_size;
  const auto run = [&](unsigned worker, unsigned stride) {
    for (std::size_t c = worker; c < chunks; c += stride) {
      const std::size_t first = c * chunk_size;
      fill(c, first, std::min(chunk_size, count - first));
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(chunks)));
  if (workers <= 1) {
    run(0, 1);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w, workers);
  for (auto& t : pool) t.join();
}

void validate_request(const PBallParams& params, std::size_t count,
                      const SamplingOptions& options) {
  params.validate();
  if (count == 0) throw DomainError("sample count must be >= 1");
  if (options.chunk_size == 0) throw DomainError("chunk_size must be >= 1");
}

// One draw of |Z|^{1/p}-scaled coordinate with law mu_p.
double draw_mu_p(Rng& rng, double p) {
  if (p == 1.0) return rng.sign() * rng.exponential();
  if (p == 2.0) return rng.normal() * 0.70710678118654752440;  // density exp(-t^2)/sqrt(pi)
  return rng.sign() * std::pow(rng.gamma(1.0 / p), 1.0 / p);
}

double draw_nu_p(Rng& rng, double p) {
  const double e = rng.exponential();
  if (p == 1.0) return e;
  if (p == 2.0) return std::sqrt(e);
  return std::pow(e, 1.0 / p);
}

void fill_product_row(Rng& rng, double p, std::span<double> row) {
  const std::size_t n = row.size() - 1;
  for (std::size_t i = 0; i < n; ++i) row[i] = draw_mu_p(rng, p);
  row[n] = draw_nu_p(rng, p);
}

SampleBatch make_batch(MeasureTag tag, const PBallParams& params, std::size_t dim,
                       std::size_t count, std::uint64_t seed, const SamplingOptions& options) {
  SampleBatch batch;
  batch.tag = tag;
  batch.params = params;
  batch.dim = dim;
  batch.count = count;
  batch.seed = seed;
  batch.chunk_size = options.chunk_size;
  batch.proposals = count;
  batch.points.assign(count * dim, 0.0);
  return batch;
}

}  // namespace

std::string_view to_string(MeasureTag tag) {
  switch (tag) {
    case MeasureTag::MuPN:
      return "MU_PN";
    case MeasureTag::VPN:
      return "V_PN";
    case MeasureTag::RejectionVPN:
      return "REJECTION_V_PN";
  }
  return "UNKNOWN";
}

std::vector<double> SampleBatch::column(std::size_t j) const {
  if (j >= dim) throw DomainError("SampleBatch::column: index out of range");
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = points[i * dim + j];
  return out;
}

SampleBatch sample_product(const PBallParams& params, std::size_t count, std::uint64_t seed,
                           const SamplingOptions& options) {
  validate_request(params, count, options);
  const std::size_t dim = static_cast<std::size_t>(params.n) + 1;
  SampleBatch batch = make_batch(MeasureTag::MuPN, params, dim, count, seed, options);
  for_each_chunk(count, options.chunk_size, options.threads,
                 [&](std::size_t chunk, std::size_t first, std::size_t rows) {
                   Rng rng(derive_seed(seed, chunk));
                   for (std::size_t r = 0; r < rows; ++r) {
                     fill_product_row(rng, params.p, {batch.points.data() + (first + r) * dim, dim});
                   }
                 });
  return batch;
}

void bgmn_map_into(std::span<const double> z, double p, std::span<double> out) {
  if (z.size() < 2 || out.size() + 1 != z.size()) {
    throw DomainError("bgmn_map: z must lie in R^{n+1} and out in R^n");
  }
  const double norm = lp_norm(z, p);
  if (norm == 0.0) throw SingularInputError("bgmn_map: z = 0");
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = z[i] / norm;
}

std::vector<double> bgmn_map(std::span<const double> z, double p) {
  if (z.size() < 2) throw DomainError("bgmn_map: z must have at least 2 coordinates");
  std::vector<double> out(z.size() - 1);
  bgmn_map_into(z, p, out);
  return out;
}

SampleBatch push_forward(const SampleBatch& product) {
  if (product.tag != MeasureTag::MuPN) throw DomainError("push_forward: expects a MU_PN batch");
  const std::size_t n = product.dim - 1;
  SampleBatch batch;
  batch.tag = MeasureTag::VPN;
  batch.params = product.params;
  batch.dim = n;
  batch.count = product.count;
  batch.seed = product.seed;
  batch.chunk_size = product.chunk_size;
  batch.proposals = product.count;
  batch.points.resize(product.count * n);
  for (std::size_t i = 0; i < product.count; ++i) {
    bgmn_map_into(product.row(i), product.params.p, {batch.points.data() + i * n, n});
  }
  return batch;
}

SampleBatch sample_ball(const PBallParams& params, std::size_t count, std::uint64_t seed,
                        const SamplingOptions& options) {
  validate_request(params, count, options);
  const std::size_t n = static_cast<std::size_t>(params.n);
  SampleBatch batch = make_batch(MeasureTag::VPN, params, n, count, seed, options);
  for_each_chunk(count, options.chunk_size, options.threads,
                 [&](std::size_t chunk, std::size_t first, std::size_t rows) {
                   Rng rng(derive_seed(seed, chunk));
                   std::vector<double> z(n + 1);
                   for (std::size_t r = 0; r < rows; ++r) {
                     fill_product_row(rng, params.p, z);
                     bgmn_map_into(z, params.p, {batch.points.data() + (first + r) * n, n});
                   }
                 });
  return batch;
}

double rejection_acceptance_rate(const PBallParams& params) {
  params.validate();
  return std::exp(ball_volume(params.p, params.n).log_value - params.n * std::log(2.0));
}

SampleBatch rejection_sample_ball(const PBallParams& params, std::size_t count,
                                  std::uint64_t seed, const SamplingOptions& options) {
  validate_request(params, count, options);
  if (params.n > 10) throw DomainError("rejection_sample_ball: requires n <= 10");
  const double rate = rejection_acceptance_rate(params);
  if (rate < kMinAcceptance) {
    std::ostringstream msg;
    msg << "rejection_sample_ball: acceptance rate " << rate << " for " << params.describe()
        << " is below " << kMinAcceptance;
    throw CapacityError(msg.str());
  }
  const std::size_t n = static_cast<std::size_t>(params.n);
  const double p = params.p;
  SampleBatch batch = make_batch(MeasureTag::RejectionVPN, params, n, count, seed, options);
  const std::size_t chunks = (count + options.chunk_size - 1) / options.chunk_size;
  std::vector<std::uint64_t> proposals(chunks, 0);
  // Magnitudes are proposed first; signs are independent and drawn only for
  // accepted points. The first few draws are taken unconditionally and
  // tested once, which avoids a mispredicted branch per draw; after that
  // the proposal exits as soon as the partial sum exceeds 1.
  const std::size_t head = std::min<std::size_t>(n, 4);
  const auto fill = [&](auto power) {
    for_each_chunk(count, options.chunk_size, options.threads,
                   [&](std::size_t chunk, std::size_t first, std::size_t rows) {
                     Rng rng(derive_seed(seed, chunk));
                     std::uint64_t tried = 0;
                     for (std::size_t r = 0; r < rows;) {
                       double* out = batch.points.data() + (first + r) * n;
                       ++tried;
                       double sum = 0.0;
                       for (std::size_t i = 0; i < head; ++i) {
                         const double u = rng.uniform();
                         out[i] = u;
                         sum += power(u);
                       }
                       if (sum > 1.0) continue;
                       std::size_t i = head;
                       for (; i < n; ++i) {
                         const double u = rng.uniform();
                         out[i] = u;
                         sum += power(u);
                         if (sum > 1.0) break;
                       }
                       if (i < n) continue;
                       std::uint64_t bits = rng.next();
                       for (std::size_t j = 0; j < n; ++j, bits >>= 1) {
                         if (bits & 1u) out[j] = -out[j];
                       }
                       ++r;
                     }
                     proposals[chunk] = tried;
                   });
  };
  if (p == 1.0) {
    fill([](double u) { return u; });
  } else if (p == 2.0) {
    fill([](double u) { return u * u; });
  } else {
    fill([p](double u) { return std::pow(u, p); });
  }
  batch.proposals = 0;
  for (auto t : proposals) batch.proposals += t;
  return batch;
}

void write_csv(const SampleBatch& batch, std::ostream& out) {
  for (std::size_t j = 0; j < batch.dim; ++j) {
    if (j > 0) out << ',';
    out << 'x' << j + 1;
  }
  out << '\n';
  for (std::size_t i = 0; i < batch.count; ++i) {
    const auto row = batch.row(i);
    for (std::size_t j = 0; j < batch.dim; ++j) {
      if (j > 0) out << ',';
      out << format_double(row[j]);
    }
    out << '\n';
  }
}

BatchSampler ball_sampler(const PBallParams& params, const SamplingOptions& options) {
  return [params, options](std::size_t count, std::uint64_t seed) {
    return sample_ball(params, count, seed, options);
  };
}

BatchSampler product_sampler(const PBallParams& params, const SamplingOptions& options) {
  return [params, options](std::size_t count, std::uint64_t seed) {
    return sample_product(params, count, seed, options);
  };
}

BatchSampler rejection_sampler(const PBallParams& params, const SamplingOptions& options) {
  return [params, options](std::size_t count, std::uint64_t seed) {
    return rejection_sample_ball(params, count, seed, options);
  };
}

}  // namespace isolab
