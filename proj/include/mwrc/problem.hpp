#pragma once

// Problem files: a JSON description of the source pmf, optionally the channel
// and simulation defaults. See README.md for the schema.

#include <optional>
#include <string>

#include "mwrc/channel.hpp"
#include "mwrc/distribution.hpp"
#include "mwrc/simulator.hpp"

namespace mwrc {

struct Problem {
  JointPmf source;
  std::optional<ChannelSpec> channel;
  SimConfig sim;        // file-supplied defaults merged over SimConfig{}
  bool has_sim = false;
};

Problem load_problem(const std::string& path);
Problem parse_problem(const std::string& json_text, const std::string& origin);

// The channel section, or a ParseError naming the command that needs it.
const ChannelSpec& require_channel(const Problem& p, const std::string& why);

}  // namespace mwrc
