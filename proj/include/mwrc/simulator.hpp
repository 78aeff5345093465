#pragma once

// Monte Carlo validation of the dithered separate source-channel scheme:
// sample source blocks, bin them, dither the indices, transport them through
// the relay (either an idealized pipe gated on the channel region, or a
// concrete symbol-level pairwise exchange), then decode every other user's
// block at every user and count block errors.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

#include "mwrc/channel.hpp"
#include "mwrc/distribution.hpp"
#include "mwrc/rates.hpp"
#include "mwrc/rng.hpp"

namespace mwrc {

// Exhaustive-decoder guards.
inline constexpr std::int64_t kMaxExhaustiveBlocks = std::int64_t{1} << 20;
inline constexpr int kMaxBinBits = 16;
inline constexpr int kMaxBlockLength = 12;
inline constexpr double kWilsonZ = 1.959963984540054;  // 95% two-sided

enum class SimMode { ideal_channel, symbol_level };

struct SimConfig {
  int m = 8;                // block length, 1..kMaxBlockLength
  double kappa = 1.0;       // channel uses per source symbol, > 0
  int trials = 1000;        // >= 1
  std::uint64_t seed = 1;
  SimMode mode = SimMode::ideal_channel;
  std::optional<Eigen::VectorXd> binning_rates;  // default: assign_rates(...)
  bool use_dither = true;   // test hook; decoders know the dithers either way
  int threads = 1;          // trial-level parallelism; never changes results
};

struct SimResult {
  double pe_overall = 0.0;         // fraction of trials with any decode error
  Eigen::VectorXd pe_per_user;     // fraction of trials where user i failed
  double wilson_lo = 0.0;          // 95% Wilson interval for pe_overall
  double wilson_hi = 1.0;
  int trials_run = 0;
  bool delivered = false;          // ideal mode: channel-region verdict
  std::vector<int> bin_bits;       // index bits actually used per user
};

// One use of the channel: uplink y0 = sum of user symbols plus relay noise,
// downlink yi = relay symbol plus user i's noise, all in GF(q), q prime.
struct ChannelUse {
  int y0 = 0;
  Eigen::VectorXi y;
};
ChannelUse channel_use(const Eigen::VectorXi& user_symbols, int relay_symbol,
                       const ChannelSpec& ch, SplitMix64& rng);

// Balanced seeded binning: a pseudorandom permutation of the alphabet^m block
// ranks followed by mod 2^bits, so bucket sizes differ by at most one.
// Returns a 1-based index in [1, 2^bits].
std::uint64_t sw_encode_bits(const Eigen::VectorXi& block, int user, int bits,
                             int alphabet, std::uint64_t seed);

// bits = ceil(m * r_user) read from the rate tuple.
std::uint64_t sw_encode(const Eigen::VectorXi& block, int user,
                        const RateTuple& rates, int alphabet,
                        std::uint64_t seed);

// Modular shift of a 1-based index by a dither in [0, modulus).
std::uint64_t apply_dither(std::uint64_t index, std::uint64_t dither,
                           std::uint64_t modulus);
std::uint64_t remove_dither(std::uint64_t index, std::uint64_t dither,
                            std::uint64_t modulus);

// Maximum-joint-probability decoding of all blocks j != user from their bin
// indices (1-based, in the order user 1..L skipping `user`, i.e. entry for
// user j is bins[j-1] with bins[user-1] ignored) and the decoder's own block.
// Ties break toward the lexicographically smallest candidate tuple. Returns
// an m x L matrix whose column user-1 is the decoder's own block.
Eigen::MatrixXi sw_decode(const std::vector<std::uint64_t>& bins,
                          const Eigen::VectorXi& own_block, int user,
                          const JointPmf& pmf, const RateTuple& rates,
                          std::uint64_t seed);

SimResult run_sim(const JointPmf& pmf, const ChannelSpec& ch,
                  const SimConfig& cfg);

// 95% Wilson score interval for `successes` out of `n`.
void wilson_interval(int successes, int n, double& lo, double& hi);

}  // namespace mwrc
