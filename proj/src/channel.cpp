#include "mwrc/channel.hpp"

#include <cmath>
#include <string>

#include "mwrc/distribution.hpp"
#include "mwrc/error.hpp"

namespace mwrc {

bool is_prime(int q) {
  if (q < 2) return false;
  for (int d = 2; d * d <= q; ++d)
    if (q % d == 0) return false;
  return true;
}

bool is_prime_power(int q) {
  if (q < 2) return false;
  int p = q;
  for (int d = 2; d * d <= q; ++d)
    if (q % d == 0) {
      p = d;
      break;
    }
  while (q % p == 0) q /= p;
  return q == 1;
}

namespace {

void check_noise_pmf(const Eigen::VectorXd& noise, int q, const std::string& which) {
  if (noise.size() != q)
    fail(Errc::shape_mismatch, which + " has " + std::to_string(noise.size()) +
                                   " entries, expected q=" + std::to_string(q));
  for (Eigen::Index i = 0; i < noise.size(); ++i)
    if (noise[i] < 0.0)
      fail(Errc::negative_probability,
           which + " entry " + std::to_string(i) + " is " + std::to_string(noise[i]));
  const double sum = noise.sum();
  if (std::abs(sum - 1.0) > kPmfSumTolerance)
    fail(Errc::sum_not_one, which + " sums to " + std::to_string(sum));
}

}  // namespace

ChannelSpec validate_channel(int q, const Eigen::VectorXd& noise_relay,
                             const std::vector<Eigen::VectorXd>& noise_users) {
  if (!is_prime_power(q))
    fail(Errc::parameter_out_of_range,
         "field order q=" + std::to_string(q) + " is not a prime power >= 2");
  const int L = static_cast<int>(noise_users.size());
  if (L < 2 || L > kMaxUsers)
    fail(Errc::shape_mismatch, "user count L=" + std::to_string(L) +
                                   " outside supported range [2, " +
                                   std::to_string(kMaxUsers) + "]");
  check_noise_pmf(noise_relay, q, "relay noise pmf");
  for (int i = 0; i < L; ++i)
    check_noise_pmf(noise_users[i], q, "user " + std::to_string(i + 1) + " noise pmf");

  ChannelSpec ch;
  ch.q = q;
  ch.noise_relay = noise_relay;
  ch.noise_users = noise_users;
  return ch;
}

double noise_entropy(const Eigen::VectorXd& noise) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < noise.size(); ++i)
    if (noise[i] > 0.0) h -= noise[i] * std::log2(noise[i]);
  return h;
}

Eigen::VectorXd capacity_terms(const ChannelSpec& ch) {
  const double logq = std::log2(static_cast<double>(ch.q));
  const double h0 = noise_entropy(ch.noise_relay);
  Eigen::VectorXd cap(ch.L());
  for (int i = 0; i < ch.L(); ++i)
    cap[i] = logq - std::max(h0, noise_entropy(ch.noise_users[i]));
  return cap;
}

}  // namespace mwrc
