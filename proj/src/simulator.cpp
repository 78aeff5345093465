#include "mwrc/simulator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "mwrc/error.hpp"
#include "mwrc/imeasure.hpp"

namespace mwrc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Substream tags: every random purpose gets its own derived stream per trial,
// so toggles that skip one purpose cannot shift any other purpose's draws.
constexpr std::uint64_t kStreamSource = 0x101;
constexpr std::uint64_t kStreamBinning = 0x202;
constexpr std::uint64_t kStreamDither = 0x303;
constexpr std::uint64_t kStreamChannel = 0x404;
constexpr std::uint64_t kStreamCode = 0x505;
constexpr std::uint64_t kStreamBinKey = 0x616;

// Joint-candidate cap for the exhaustive decoder.
constexpr double kMaxJointCandidates = 1 << 22;

// base^exp, saturating just past `cap` so callers can reject oversize values.
std::int64_t ipow(std::int64_t base, int exp, std::int64_t cap) {
  std::int64_t v = 1;
  for (int i = 0; i < exp; ++i) {
    v *= base;
    if (v > cap) return cap + 1;
  }
  return v;
}

int ceil_log(int base, std::uint64_t value) {
  int d = 0;
  std::uint64_t v = 1;
  while (v < value) {
    v *= static_cast<std::uint64_t>(base);
    ++d;
  }
  return d;
}

int sample_pmf(const Eigen::VectorXd& p, SplitMix64& rng) {
  const double u = rng.uniform01() * p.sum();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (u < acc) return static_cast<int>(i);
  }
  for (Eigen::Index i = p.size() - 1; i >= 0; --i)
    if (p[i] > 0.0) return static_cast<int>(i);
  return 0;
}

// 4-round balanced Feistel network on 2*half_bits bits: a keyed permutation.
std::uint64_t feistel(std::uint64_t x, int half_bits, std::uint64_t key) {
  const std::uint64_t mask = (std::uint64_t{1} << half_bits) - 1;
  std::uint64_t l = x >> half_bits;
  std::uint64_t r = x & mask;
  for (int round = 0; round < 4; ++round) {
    const std::uint64_t f =
        mix64(r ^ key ^ (0x9e3779b9ULL * static_cast<std::uint64_t>(round + 1))) & mask;
    const std::uint64_t nl = r;
    r = l ^ f;
    l = nl;
  }
  return (l << half_bits) | r;
}

// Keyed pseudorandom permutation of [0, domain) by cycle-walking the Feistel
// permutation of the enclosing power-of-four domain.
std::uint64_t permute(std::uint64_t x, std::uint64_t domain, std::uint64_t key) {
  if (domain <= 1) return 0;
  const int nb = static_cast<int>(std::bit_width(domain - 1));
  const int half = (nb + 1) / 2;
  std::uint64_t y = x;
  do {
    y = feistel(y, half, key);
  } while (y >= domain);
  return y;
}

std::uint64_t rank_of_block(const Eigen::VectorXi& block, int alphabet) {
  std::uint64_t rank = 0;
  for (Eigen::Index t = 0; t < block.size(); ++t) {
    if (block[t] < 0 || block[t] >= alphabet)
      fail(Errc::parameter_out_of_range,
           "block symbol " + std::to_string(block[t]) +
               " outside alphabet of size " + std::to_string(alphabet));
    rank = rank * static_cast<std::uint64_t>(alphabet) +
           static_cast<std::uint64_t>(block[t]);
  }
  return rank;
}

int bits_for_rate(int m, double rate) {
  if (!std::isfinite(rate) || rate < 0.0)
    fail(Errc::parameter_out_of_range,
         "binning rate " + std::to_string(rate) + " must be finite and >= 0");
  const int b = static_cast<int>(std::ceil(m * rate - 1e-9));
  return std::max(b, 0);
}

std::int64_t checked_blocks(int alphabet, int m, const char* what) {
  const std::int64_t A = ipow(alphabet, m, kMaxExhaustiveBlocks);
  if (A > kMaxExhaustiveBlocks)
    fail(Errc::tractability_exceeded,
         std::string(what) + ": alphabet^m exceeds " +
             std::to_string(kMaxExhaustiveBlocks) + " blocks");
  return A;
}

void check_bits(int bits) {
  if (bits < 0)
    fail(Errc::parameter_out_of_range, "negative index bit count");
  if (bits > kMaxBinBits)
    fail(Errc::tractability_exceeded,
         "index of " + std::to_string(bits) + " bits exceeds the " +
             std::to_string(kMaxBinBits) + "-bit cap");
}

// Exceeding the cap is a resource limit (exhaustive decoding grows as
// alphabet^m), not a malformed parameter, so it gets the tractability code.
void check_block_length(int m) {
  if (m < 1)
    fail(Errc::parameter_out_of_range,
         "block length " + std::to_string(m) + " must be >= 1");
  if (m > kMaxBlockLength)
    fail(Errc::tractability_exceeded,
         "block length " + std::to_string(m) + " exceeds the cap of " +
             std::to_string(kMaxBlockLength));
}

// Shared decoding state: log joint probabilities plus, per user, the bucket
// lists of the binning map (rank lists in ascending order).
struct DecodeContext {
  const JointPmf* pmf = nullptr;
  int m = 0;
  std::vector<int> bits;
  std::vector<std::int64_t> A;
  std::vector<std::vector<std::vector<std::uint32_t>>> buckets;
  Eigen::VectorXd logp;
  std::vector<std::int64_t> stride;
};

DecodeContext build_context(const JointPmf& pmf, int m,
                            const std::vector<int>& bits, std::uint64_t seed) {
  DecodeContext ctx;
  ctx.pmf = &pmf;
  ctx.m = m;
  ctx.bits = bits;
  ctx.stride = strides(pmf);
  ctx.logp.resize(pmf.probs.size());
  for (Eigen::Index i = 0; i < pmf.probs.size(); ++i)
    ctx.logp[i] = pmf.probs[i] > 0.0 ? std::log2(pmf.probs[i]) : kNegInf;
  ctx.A.resize(pmf.L);
  ctx.buckets.resize(pmf.L);
  for (int u = 1; u <= pmf.L; ++u) {
    check_bits(bits[u - 1]);
    const std::int64_t A = checked_blocks(pmf.alphabet_sizes[u - 1], m, "decoder");
    ctx.A[u - 1] = A;
    const std::uint64_t B = std::uint64_t{1} << bits[u - 1];
    const std::uint64_t key = derive_seed(seed, kStreamBinKey, u);
    ctx.buckets[u - 1].assign(B, {});
    for (std::int64_t rank = 0; rank < A; ++rank) {
      const std::uint64_t bin =
          permute(static_cast<std::uint64_t>(rank), static_cast<std::uint64_t>(A), key) % B;
      ctx.buckets[u - 1][bin].push_back(static_cast<std::uint32_t>(rank));
    }
  }
  return ctx;
}

void rank_to_column(std::uint32_t rank, int alphabet, Eigen::Ref<Eigen::VectorXi> col) {
  for (Eigen::Index t = col.size() - 1; t >= 0; --t) {
    col[t] = static_cast<int>(rank % static_cast<std::uint32_t>(alphabet));
    rank /= static_cast<std::uint32_t>(alphabet);
  }
}

Eigen::MatrixXi decode_with(const DecodeContext& ctx,
                            const std::vector<std::uint64_t>& bins,
                            const Eigen::VectorXi& own_block, int user) {
  const JointPmf& pmf = *ctx.pmf;
  const int L = pmf.L;
  const int m = ctx.m;
  if (user < 1 || user > L)
    fail(Errc::parameter_out_of_range, "decoder user " + std::to_string(user));
  if (own_block.size() != m)
    fail(Errc::shape_mismatch, "own block has " + std::to_string(own_block.size()) +
                                   " symbols, expected " + std::to_string(m));
  if (static_cast<int>(bins.size()) != L)
    fail(Errc::shape_mismatch, "expected " + std::to_string(L) + " bin indices");

  static const std::vector<std::uint32_t> kFallback{0};
  std::vector<int> others;
  std::vector<const std::vector<std::uint32_t>*> lists;
  double total = 1.0;
  for (int j = 1; j <= L; ++j) {
    if (j == user) continue;
    const std::uint64_t B = std::uint64_t{1} << ctx.bits[j - 1];
    if (bins[j - 1] < 1 || bins[j - 1] > B)
      fail(Errc::index_out_of_range,
           "bin index " + std::to_string(bins[j - 1]) + " for user " +
               std::to_string(j) + " outside [1, " + std::to_string(B) + "]");
    const auto& lst = ctx.buckets[j - 1][bins[j - 1] - 1];
    others.push_back(j);
    lists.push_back(lst.empty() ? &kFallback : &lst);  // always decide something
    total *= static_cast<double>(lists.back()->size());
  }
  if (total > kMaxJointCandidates)
    fail(Errc::tractability_exceeded,
         "joint candidate set of ~" + std::to_string(total) + " tuples");

  // Own block's fixed additive share of each time slot's flat outcome index.
  rank_of_block(own_block, pmf.alphabet_sizes[user - 1]);  // validates symbols
  std::vector<std::int64_t> base(m);
  for (int t = 0; t < m; ++t)
    base[t] = static_cast<std::int64_t>(own_block[t]) * ctx.stride[user - 1];

  // Per-candidate additive shares, precomputed per user.
  const std::size_t K = others.size();
  std::vector<std::vector<std::vector<std::int64_t>>> contrib(K);
  for (std::size_t k = 0; k < K; ++k) {
    const int j = others[k];
    const int alph = pmf.alphabet_sizes[j - 1];
    contrib[k].resize(lists[k]->size());
    for (std::size_t c = 0; c < lists[k]->size(); ++c) {
      std::uint32_t rank = (*lists[k])[c];
      auto& share = contrib[k][c];
      share.resize(m);
      for (int t = m - 1; t >= 0; --t) {
        share[t] = static_cast<std::int64_t>(rank % static_cast<std::uint32_t>(alph)) *
                   ctx.stride[j - 1];
        rank /= static_cast<std::uint32_t>(alph);
      }
    }
  }

  // Lexicographic sweep (largest user index fastest); strict improvement
  // keeps the lexicographically smallest maximizer.
  std::vector<std::size_t> idx(K, 0);
  std::vector<std::size_t> best_idx = idx;
  double best = kNegInf;
  bool first = true;
  while (true) {
    double lp = 0.0;
    for (int t = 0; t < m && lp != kNegInf; ++t) {
      std::int64_t flat = base[t];
      for (std::size_t k = 0; k < K; ++k) flat += contrib[k][idx[k]][t];
      lp += ctx.logp[flat];
    }
    if (first || lp > best) {
      best = lp;
      best_idx = idx;
      first = false;
    }
    std::size_t k = K;
    while (k > 0) {
      --k;
      if (++idx[k] < lists[k]->size()) break;
      idx[k] = 0;
      if (k == 0) {
        k = SIZE_MAX;
        break;
      }
    }
    if (K == 0 || k == SIZE_MAX) break;
  }

  Eigen::MatrixXi out(m, L);
  out.col(user - 1) = own_block;
  for (std::size_t k = 0; k < K; ++k) {
    const int j = others[k];
    rank_to_column((*lists[k])[best_idx[k]], pmf.alphabet_sizes[j - 1], out.col(j - 1));
  }
  return out;
}

}  // namespace

ChannelUse channel_use(const Eigen::VectorXi& user_symbols, int relay_symbol,
                       const ChannelSpec& ch, SplitMix64& rng) {
  const int q = ch.q;
  const int L = ch.L();
  if (!is_prime(q))
    fail(Errc::parameter_out_of_range,
         "symbol arithmetic is implemented for prime q only, got q=" +
             std::to_string(q));
  if (user_symbols.size() != L)
    fail(Errc::shape_mismatch, "expected " + std::to_string(L) + " user symbols");
  auto check_symbol = [q](int s, const std::string& who) {
    if (s < 0 || s >= q)
      fail(Errc::symbol_out_of_field,
           who + " symbol " + std::to_string(s) + " outside GF(" +
               std::to_string(q) + ")");
  };
  int sum = 0;
  for (int i = 0; i < L; ++i) {
    check_symbol(user_symbols[i], "user " + std::to_string(i + 1));
    sum = (sum + user_symbols[i]) % q;
  }
  check_symbol(relay_symbol, "relay");

  ChannelUse use;
  use.y0 = (sum + sample_pmf(ch.noise_relay, rng)) % q;
  use.y.resize(L);
  for (int i = 0; i < L; ++i)
    use.y[i] = (relay_symbol + sample_pmf(ch.noise_users[i], rng)) % q;
  return use;
}

std::uint64_t sw_encode_bits(const Eigen::VectorXi& block, int user, int bits,
                             int alphabet, std::uint64_t seed) {
  const int m = static_cast<int>(block.size());
  check_block_length(m);
  if (alphabet < 1)
    fail(Errc::parameter_out_of_range, "alphabet size must be positive");
  if (user < 1)
    fail(Errc::parameter_out_of_range, "user index must be positive");
  check_bits(bits);
  const std::int64_t A = checked_blocks(alphabet, m, "encoder");
  const std::uint64_t rank = rank_of_block(block, alphabet);
  const std::uint64_t B = std::uint64_t{1} << bits;
  const std::uint64_t key = derive_seed(seed, kStreamBinKey, user);
  return permute(rank, static_cast<std::uint64_t>(A), key) % B + 1;
}

std::uint64_t sw_encode(const Eigen::VectorXi& block, int user,
                        const RateTuple& rates, int alphabet,
                        std::uint64_t seed) {
  if (user < 1 || user > static_cast<int>(rates.r.size()))
    fail(Errc::parameter_out_of_range,
         "user " + std::to_string(user) + " outside the rate tuple");
  const int bits = bits_for_rate(static_cast<int>(block.size()), rates.r[user - 1]);
  return sw_encode_bits(block, user, bits, alphabet, seed);
}

std::uint64_t apply_dither(std::uint64_t index, std::uint64_t dither,
                           std::uint64_t modulus) {
  if (modulus < 1)
    fail(Errc::parameter_out_of_range, "dither modulus must be positive");
  if (index < 1 || index > modulus)
    fail(Errc::index_out_of_range,
         "index " + std::to_string(index) + " outside [1, " +
             std::to_string(modulus) + "]");
  if (dither >= modulus)
    fail(Errc::index_out_of_range,
         "dither " + std::to_string(dither) + " outside [0, " +
             std::to_string(modulus) + ")");
  return (index - 1 + dither) % modulus + 1;
}

std::uint64_t remove_dither(std::uint64_t index, std::uint64_t dither,
                            std::uint64_t modulus) {
  if (modulus < 1)
    fail(Errc::parameter_out_of_range, "dither modulus must be positive");
  if (index < 1 || index > modulus)
    fail(Errc::index_out_of_range,
         "index " + std::to_string(index) + " outside [1, " +
             std::to_string(modulus) + "]");
  if (dither >= modulus)
    fail(Errc::index_out_of_range,
         "dither " + std::to_string(dither) + " outside [0, " +
             std::to_string(modulus) + ")");
  return (index - 1 + (modulus - dither)) % modulus + 1;
}

Eigen::MatrixXi sw_decode(const std::vector<std::uint64_t>& bins,
                          const Eigen::VectorXi& own_block, int user,
                          const JointPmf& pmf, const RateTuple& rates,
                          std::uint64_t seed) {
  if (rates.r.size() != pmf.L)
    fail(Errc::shape_mismatch, "rate tuple has " + std::to_string(rates.r.size()) +
                                   " entries, expected " + std::to_string(pmf.L));
  const int m = static_cast<int>(own_block.size());
  check_block_length(m);
  std::vector<int> bits(pmf.L);
  for (int j = 0; j < pmf.L; ++j) bits[j] = bits_for_rate(m, rates.r[j]);
  const DecodeContext ctx = build_context(pmf, m, bits, seed);
  return decode_with(ctx, bins, own_block, user);
}

void wilson_interval(int successes, int n, double& lo, double& hi) {
  if (n <= 0) {
    lo = 0.0;
    hi = 1.0;
    return;
  }
  const double z = kWilsonZ;
  const double p = static_cast<double>(successes) / n;
  const double den = 1.0 + z * z / n;
  const double center = (p + z * z / (2.0 * n)) / den;
  const double half =
      z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / den;
  lo = successes == 0 ? 0.0 : std::max(0.0, center - half);
  hi = successes == n ? 1.0 : std::min(1.0, center + half);
}

namespace {

// Everything fixed across trials of one simulation run.
struct SimPlan {
  const JointPmf* pmf = nullptr;
  const ChannelSpec* ch = nullptr;
  SimConfig cfg;
  Eigen::VectorXd rates;
  std::vector<int> bits;
  std::vector<std::uint64_t> B;
  bool delivered = false;
  // symbol-level mode
  int digits = 0;        // index digits carried per window, base q
  int code_len = 0;      // channel uses per window and direction
  std::int64_t qd = 1;   // q^digits candidate count for ML decoding
};

// Maximum-likelihood decode of one length-`digits` field vector from `y`,
// observed through code `G` (code_len x digits, column-major flat) under the
// noise log-pmf `logp`. Lexicographic sweep; first maximizer wins.
std::vector<int> ml_decode(const std::vector<int>& G, int code_len, int digits,
                           int q, const std::vector<int>& y,
                           const Eigen::VectorXd& logp, std::int64_t qd) {
  std::vector<int> u(digits, 0), best_u(digits, 0);
  std::vector<int> cw(code_len, 0);
  auto score = [&]() {
    double s = 0.0;
    for (int t = 0; t < code_len && s != kNegInf; ++t)
      s += logp[(y[t] - cw[t] + q) % q];
    return s;
  };
  double best = score();
  for (std::int64_t c = 1; c < qd; ++c) {
    int k = digits - 1;
    while (true) {
      ++u[k];
      for (int t = 0; t < code_len; ++t) cw[t] = (cw[t] + G[k * code_len + t]) % q;
      if (u[k] < q) break;
      u[k] = 0;
      --k;
    }
    const double s = score();
    if (s > best) {
      best = s;
      best_u = u;
    }
  }
  return best_u;
}

// Runs one trial; returns per-user failure flags in `fail_user` and whether
// any decoder failed.
bool run_trial(const SimPlan& plan, std::uint64_t t, std::vector<char>& fail_user) {
  const JointPmf& pmf = *plan.pmf;
  const ChannelSpec& ch = *plan.ch;
  const SimConfig& cfg = plan.cfg;
  const int L = pmf.L;
  const int m = cfg.m;
  const int q = ch.q;

  SplitMix64 src_rng(derive_seed(cfg.seed, kStreamSource, t));
  const Eigen::MatrixXi W = sample(pmf, m, src_rng);

  const std::uint64_t bin_seed = derive_seed(cfg.seed, kStreamBinning, t);
  const DecodeContext ctx = build_context(pmf, m, plan.bits, bin_seed);

  SplitMix64 dither_rng(derive_seed(cfg.seed, kStreamDither, t));
  std::vector<std::uint64_t> Mp(L), M(L), D(L, 0);
  for (int j = 0; j < L; ++j)
    Mp[j] = sw_encode_bits(W.col(j), j + 1, plan.bits[j],
                           pmf.alphabet_sizes[j], bin_seed);
  for (int j = 0; j < L; ++j) {
    const std::uint64_t dv = dither_rng.below(plan.B[j]);
    D[j] = cfg.use_dither ? dv : 0;
    M[j] = apply_dither(Mp[j], D[j], plan.B[j]);
  }

  // received[i][j]: user i+1's copy of user j+1's dithered index.
  std::vector<std::vector<std::uint64_t>> received(L, M);
  if (cfg.mode == SimMode::symbol_level && plan.digits > 0) {
    const int d = plan.digits;
    const int c = plan.code_len;
    const int windows = L - 1;

    // Second-layer dither: lift each index into a uniform vector over
    // GF(q)^d so the pairwise sums the relay decodes are uniform too.
    std::vector<std::vector<int>> E(L, std::vector<int>(d, 0));
    for (int j = 0; j < L; ++j)
      for (int k = 0; k < d; ++k) {
        const int e = static_cast<int>(dither_rng.below(q));
        E[j][k] = cfg.use_dither ? e : 0;
      }
    std::vector<std::vector<int>> V(L, std::vector<int>(d, 0));
    for (int j = 0; j < L; ++j) {
      std::uint64_t v = M[j] - 1;
      for (int k = d - 1; k >= 0; --k) {
        V[j][k] = static_cast<int>((v % q + E[j][k]) % q);
        v /= q;
      }
    }

    SplitMix64 code_rng(derive_seed(cfg.seed, kStreamCode, t));
    SplitMix64 chan_rng(derive_seed(cfg.seed, kStreamChannel, t));
    auto draw_code = [&]() {
      std::vector<int> G(static_cast<std::size_t>(c) * d);
      for (auto& g : G) g = static_cast<int>(code_rng.below(q));
      return G;
    };
    std::vector<std::vector<int>> G_up(windows), G_dn(windows);
    for (int w = 0; w < windows; ++w) G_up[w] = draw_code();
    for (int w = 0; w < windows; ++w) G_dn[w] = draw_code();

    // Uplink: in window w users w+1 and w+2 transmit simultaneously; the
    // relay ML-decodes their vector sum from the superimposed codeword.
    Eigen::VectorXd logp0(q);
    for (int s = 0; s < q; ++s)
      logp0[s] = ch.noise_relay[s] > 0.0 ? std::log2(ch.noise_relay[s]) : kNegInf;
    std::vector<std::vector<int>> uhat(windows);
    for (int w = 0; w < windows; ++w) {
      std::vector<int> usum(d);
      for (int k = 0; k < d; ++k) usum[k] = (V[w][k] + V[w + 1][k]) % q;
      std::vector<int> y0(c);
      for (int tt = 0; tt < c; ++tt) {
        int s = 0;
        for (int k = 0; k < d; ++k) s += G_up[w][k * c + tt] * usum[k];
        y0[tt] = (s % q + sample_pmf(ch.noise_relay, chan_rng)) % q;
      }
      uhat[w] = ml_decode(G_up[w], c, d, q, y0, logp0, plan.qd);
    }

    // Downlink: the relay broadcasts each decoded sum; every user decodes
    // every window from its own noisy copy.
    std::vector<Eigen::VectorXd> logpi(L);
    for (int i = 0; i < L; ++i) {
      logpi[i].resize(q);
      for (int s = 0; s < q; ++s)
        logpi[i][s] =
            ch.noise_users[i][s] > 0.0 ? std::log2(ch.noise_users[i][s]) : kNegInf;
    }
    // vhat[i][w]: user i+1's decision on window w's sum.
    std::vector<std::vector<std::vector<int>>> vhat(
        L, std::vector<std::vector<int>>(windows));
    for (int w = 0; w < windows; ++w) {
      std::vector<int> x0(c);
      for (int tt = 0; tt < c; ++tt) {
        int s = 0;
        for (int k = 0; k < d; ++k) s += G_dn[w][k * c + tt] * uhat[w][k];
        x0[tt] = s % q;
      }
      for (int i = 0; i < L; ++i) {
        std::vector<int> yi(c);
        for (int tt = 0; tt < c; ++tt)
          yi[tt] = (x0[tt] + sample_pmf(ch.noise_users[i], chan_rng)) % q;
        vhat[i][w] = ml_decode(G_dn[w], c, d, q, yi, logpi[i], plan.qd);
      }
    }

    // Chain outward from each user's own (exactly known) vector.
    for (int i = 0; i < L; ++i) {
      std::vector<std::vector<int>> Vh(L);
      Vh[i] = V[i];
      for (int j = i + 1; j < L; ++j) {
        Vh[j].resize(d);
        for (int k = 0; k < d; ++k)
          Vh[j][k] = (vhat[i][j - 1][k] - Vh[j - 1][k] + q) % q;
      }
      for (int j = i - 1; j >= 0; --j) {
        Vh[j].resize(d);
        for (int k = 0; k < d; ++k)
          Vh[j][k] = (vhat[i][j][k] - Vh[j + 1][k] + q) % q;
      }
      for (int j = 0; j < L; ++j) {
        if (j == i) continue;
        std::uint64_t v = 0;
        for (int k = 0; k < d; ++k)
          v = v * q + static_cast<std::uint64_t>((Vh[j][k] - E[j][k] + q) % q);
        received[i][j] = v % plan.B[j] + 1;
      }
    }
  }

  bool any = false;
  for (int i = 1; i <= L; ++i) {
    std::vector<std::uint64_t> bins(static_cast<std::size_t>(L), 1);
    for (int j = 1; j <= L; ++j) {
      if (j == i) continue;
      bins[j - 1] = remove_dither(received[i - 1][j - 1], D[j - 1], plan.B[j - 1]);
    }
    const Eigen::MatrixXi out = decode_with(ctx, bins, W.col(i - 1), i);
    bool bad = false;
    for (int j = 1; j <= L; ++j)
      if (j != i && out.col(j - 1) != W.col(j - 1)) bad = true;
    fail_user[i - 1] = bad ? 1 : 0;
    any = any || bad;
  }
  return any;
}

}  // namespace

SimResult run_sim(const JointPmf& pmf, const ChannelSpec& ch,
                  const SimConfig& cfg) {
  const int L = pmf.L;
  if (ch.L() != L)
    fail(Errc::shape_mismatch, "source has L=" + std::to_string(L) +
                                   " users, channel has " +
                                   std::to_string(ch.L()));
  check_block_length(cfg.m);
  if (cfg.trials < 1)
    fail(Errc::parameter_out_of_range, "trials must be >= 1");
  if (!std::isfinite(cfg.kappa) || cfg.kappa <= 0.0)
    fail(Errc::parameter_out_of_range, "kappa must be positive and finite");
  if (!is_prime(ch.q))
    fail(Errc::parameter_out_of_range,
         "the simulator is implemented for prime q only, got q=" +
             std::to_string(ch.q));

  SimPlan plan;
  plan.pmf = &pmf;
  plan.ch = &ch;
  plan.cfg = cfg;

  if (cfg.binning_rates) {
    if (cfg.binning_rates->size() != L)
      fail(Errc::shape_mismatch, "binning_rates has " +
                                     std::to_string(cfg.binning_rates->size()) +
                                     " entries, expected " + std::to_string(L));
    plan.rates = *cfg.binning_rates;
    for (int j = 0; j < L; ++j)
      if (!std::isfinite(plan.rates[j]) || plan.rates[j] < 0.0)
        fail(Errc::parameter_out_of_range,
             "binning rate for user " + std::to_string(j + 1) +
                 " must be finite and >= 0");
  } else {
    const RateTuple rt = assign_rates(compute_atoms(pmf));
    if (rt.hard_negative)
      fail(Errc::parameter_out_of_range,
           "constructed rates are negative; pass binning_rates explicitly");
    plan.rates = rt.r;
  }

  const Eigen::VectorXd cap = capacity_terms(ch);
  plan.delivered = channel_region_ok(plan.rates / cfg.kappa, ch).ok;

  // Index sizes. The idealized channel converts spare budget beyond the
  // tuple's own requirement into extra binning bits across the board; the
  // symbol-level mode spends that budget on the actual channel code instead.
  double slack = 0.0;
  if (cfg.mode == SimMode::ideal_channel && cap.minCoeff() > 0.0) {
    const double sum = plan.rates.sum();
    double kappa_r = 0.0;
    for (int i = 0; i < L; ++i) {
      const double need = sum - plan.rates[i];
      if (need > kRateTolerance) kappa_r = std::max(kappa_r, need / cap[i]);
    }
    slack = std::max(0.0, cfg.kappa - kappa_r) * cap.minCoeff();
  }
  plan.bits.resize(L);
  plan.B.resize(L);
  double bucket_work = 0.0;
  for (int j = 0; j < L; ++j) {
    const std::int64_t A = checked_blocks(pmf.alphabet_sizes[j], cfg.m, "binning");
    bucket_work += static_cast<double>(A);
    int b = bits_for_rate(cfg.m, plan.rates[j] + slack);
    b = std::min(
        b, static_cast<int>(std::bit_width(static_cast<std::uint64_t>(A) - 1)));
    check_bits(b);
    plan.bits[j] = b;
    plan.B[j] = std::uint64_t{1} << b;
  }
  if (bucket_work * cfg.trials > 2.0e9)
    fail(Errc::tractability_exceeded,
         "binning work (sum of alphabet^m over users, times trials) too large");

  SimResult res;
  res.delivered = plan.delivered;
  res.bin_bits = plan.bits;
  res.trials_run = cfg.trials;
  res.pe_per_user = Eigen::VectorXd::Zero(L);

  if (cfg.mode == SimMode::ideal_channel && !plan.delivered) {
    // The relay denies service: no index is transported, every decoder fails.
    res.pe_overall = 1.0;
    res.pe_per_user.setOnes();
    wilson_interval(cfg.trials, cfg.trials, res.wilson_lo, res.wilson_hi);
    return res;
  }

  if (cfg.mode == SimMode::symbol_level) {
    std::uint64_t maxB = 1;
    for (int j = 0; j < L; ++j) maxB = std::max(maxB, plan.B[j]);
    plan.digits = ceil_log(ch.q, maxB);
    const int n_uses = static_cast<int>(std::ceil(cfg.kappa * cfg.m - 1e-9));
    plan.code_len = n_uses / (L - 1);
    plan.qd = ipow(ch.q, plan.digits, kMaxExhaustiveBlocks);
    if (plan.qd > kMaxExhaustiveBlocks)
      fail(Errc::tractability_exceeded,
           "ML decoding over q^digits > " + std::to_string(kMaxExhaustiveBlocks) +
               " candidates");
    const double work = static_cast<double>(plan.qd) * (plan.code_len + 1) *
                        (L - 1) * (L + 1) * cfg.trials;
    if (work > 2.0e9)
      fail(Errc::tractability_exceeded, "symbol-level ML decoding work too large");
  }

  const int threads =
      std::max(1, std::min(cfg.threads <= 0 ? 1 : cfg.threads, cfg.trials));
  std::vector<long> fails(threads, 0);
  std::vector<std::vector<long>> user_fails(threads, std::vector<long>(L, 0));
  auto worker = [&](int w) {
    std::vector<char> fail_user(L, 0);
    for (int t = w; t < cfg.trials; t += threads) {
      if (run_trial(plan, static_cast<std::uint64_t>(t), fail_user)) ++fails[w];
      for (int i = 0; i < L; ++i) user_fails[w][i] += fail_user[i];
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int w = 0; w < threads; ++w) pool.emplace_back(worker, w);
    for (auto& th : pool) th.join();
  }

  long total_fails = 0;
  std::vector<long> per_user(L, 0);
  for (int w = 0; w < threads; ++w) {
    total_fails += fails[w];
    for (int i = 0; i < L; ++i) per_user[i] += user_fails[w][i];
  }
  res.pe_overall = static_cast<double>(total_fails) / cfg.trials;
  for (int i = 0; i < L; ++i)
    res.pe_per_user[i] = static_cast<double>(per_user[i]) / cfg.trials;
  wilson_interval(static_cast<int>(total_fails), cfg.trials, res.wilson_lo,
                  res.wilson_hi);
  return res;
}

}  // namespace mwrc
