#pragma once

#include <json.hpp>

#include "ddotfs/alignment.hpp"
#include "ddotfs/channel.hpp"

namespace ddotfs {

// {"paths": [{"delay_s", "doppler_hz", "h_re": [...], "h_im": [...]}, ...]}
nlohmann::json channel_to_json(const channel::MultipathChannel& ch);
channel::MultipathChannel channel_from_json(const nlohmann::json& doc);

// {"mode", "n_max", "entries": [{"kappa", "b", "f_re", "f_im"}], "selected_bins": [[k, l], ...]}
nlohmann::json plan_to_json(const ddam::AlignmentPlan& plan);
ddam::AlignmentPlan plan_from_json(const nlohmann::json& doc);

}  // namespace ddotfs
