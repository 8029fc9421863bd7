#include "ddotfs/serialize.hpp"

#include <string>

#include "ddotfs/types.hpp"

namespace ddotfs {

using nlohmann::json;

namespace {

json split_re(const Eigen::VectorXcd& v) {
  json re = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) re.push_back(v[i].real());
  return re;
}

json split_im(const Eigen::VectorXcd& v) {
  json im = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) im.push_back(v[i].imag());
  return im;
}

Eigen::VectorXcd join(const json& re, const json& im) {
  if (!re.is_array() || !im.is_array() || re.size() != im.size()) {
    throw ConfigError("complex vector: re/im arrays missing or of different length");
  }
  Eigen::VectorXcd v(static_cast<Eigen::Index>(re.size()));
  for (std::size_t i = 0; i < re.size(); ++i) v[static_cast<Eigen::Index>(i)] = cd(re[i].get<double>(), im[i].get<double>());
  return v;
}

}  // namespace

json channel_to_json(const channel::MultipathChannel& ch) {
  json paths = json::array();
  for (const auto& p : ch.paths) {
    paths.push_back({{"delay_s", p.delay_s}, {"doppler_hz", p.doppler_hz}, {"h_re", split_re(p.gain)}, {"h_im", split_im(p.gain)}});
  }
  return json{{"paths", paths}};
}

channel::MultipathChannel channel_from_json(const json& doc) {
  try {
    channel::MultipathChannel ch;
    for (const auto& p : doc.at("paths")) {
      ch.paths.push_back({p.at("delay_s").get<double>(), p.at("doppler_hz").get<double>(), join(p.at("h_re"), p.at("h_im"))});
    }
    return ch;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("channel JSON: ") + e.what());
  }
}

json plan_to_json(const ddam::AlignmentPlan& plan) {
  json entries = json::array();
  for (const auto& e : plan.entries) {
    entries.push_back({{"kappa", e.kappa}, {"b", e.b}, {"f_re", split_re(e.f)}, {"f_im", split_im(e.f)}});
  }
  json doc{{"mode", plan.mode == ddam::AlignMode::path ? "path" : "bin"}, {"n_max", plan.n_max}, {"entries", entries}};
  if (plan.mode == ddam::AlignMode::bin) {
    json bins = json::array();
    for (const auto& b : plan.selected_bins) bins.push_back({b.doppler, b.delay});
    doc["selected_bins"] = bins;
  }
  return doc;
}

ddam::AlignmentPlan plan_from_json(const json& doc) {
  try {
    ddam::AlignmentPlan plan;
    const auto mode = doc.at("mode").get<std::string>();
    if (mode == "path") plan.mode = ddam::AlignMode::path;
    else if (mode == "bin") plan.mode = ddam::AlignMode::bin;
    else throw ConfigError("plan JSON: unknown mode '" + mode + "'");
    plan.n_max = doc.at("n_max").get<long>();
    for (const auto& e : doc.at("entries")) {
      plan.entries.push_back({e.at("kappa").get<long>(), e.at("b").get<double>(), join(e.at("f_re"), e.at("f_im"))});
    }
    if (plan.mode == ddam::AlignMode::bin) {
      for (const auto& b : doc.at("selected_bins")) plan.selected_bins.push_back({b.at(0).get<int>(), b.at(1).get<int>()});
    }
    return plan;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("plan JSON: ") + e.what());
  }
}

}  // namespace ddotfs
