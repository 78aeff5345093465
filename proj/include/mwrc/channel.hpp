#pragma once

// Finite-field relay channel description: field order q, additive relay noise
// N0 on the uplink, and per-user downlink noises N1..NL. All noises are pmfs
// over the q field elements.

#include <Eigen/Dense>

#include <vector>

namespace mwrc {

struct ChannelSpec {
  int q = 2;
  Eigen::VectorXd noise_relay;               // pmf over {0..q-1}
  std::vector<Eigen::VectorXd> noise_users;  // L pmfs over {0..q-1}

  int L() const { return static_cast<int>(noise_users.size()); }
};

bool is_prime(int q);
bool is_prime_power(int q);

// Checks q (prime power >= 2), pmf shapes, nonnegativity and normalization.
ChannelSpec validate_channel(int q, const Eigen::VectorXd& noise_relay,
                             const std::vector<Eigen::VectorXd>& noise_users);

// Entropy in bits of one noise pmf.
double noise_entropy(const Eigen::VectorXd& noise);

// Per-user uplink/downlink bottleneck: log2 q - max(H(N0), H(Ni)).
Eigen::VectorXd capacity_terms(const ChannelSpec& ch);

}  // namespace mwrc
