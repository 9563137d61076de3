// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The semsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// semsim: train, evaluate, config dump, channel self-check and annotation ingest.
//
// Exit codes: 0 success, 2 usage or configuration error, 3 runtime failure.
// SEMSIM_LOG=quiet|info|debug controls progress output on stderr.

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "semsim/channel.hpp"
#include "semsim/digest.hpp"
#include "semsim/error.hpp"
#include "semsim/experiment.hpp"

namespace {

using namespace semsim;

constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

enum class LogLevel { kQuiet, kInfo, kDebug };

LogLevel log_level() {
  const char* v = std::getenv("SEMSIM_LOG");
  if (!v) return LogLevel::kInfo;
  const std::string s(v);
  if (s == "quiet" || s == "0") return LogLevel::kQuiet;
  if (s == "debug" || s == "2") return LogLevel::kDebug;
  return LogLevel::kInfo;
}

void info(const std::string& msg) {
  if (log_level() >= LogLevel::kInfo) std::cerr << msg << "\n";
}

// Usage and configuration problems map to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> episodes;
  std::string out;
  std::vector<std::string> clips;
  std::string snapshot;
  int jobs = 1;
};

ExperimentConfig load_config(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? default_experiment() : load_experiment(c.config);
  if (c.seed) cfg.apply_seed(*c.seed);
  if (c.episodes) cfg.training.episodes = *c.episodes;
  if (!c.out.empty()) cfg.output_dir = c.out;
  cfg.validate();
  return cfg;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_train(const Common& c, const std::string& resume) {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentConfig cfg = load_config(c);
  const auto clips = load_clips(cfg.train_clips, cfg.base_dir);
  if (clips.empty()) throw UsageError("no training clips configured");
  std::optional<SacNetworks> start;
  if (!resume.empty()) start = networks_from_json(read_file(resume));

  const LogLevel level = log_level();
  auto progress = [&](const EpisodeCurve& e) {
    if (level == LogLevel::kDebug || (level == LogLevel::kInfo && (e.episode + 1) % 50 == 0)) {
      char buf[200];
      std::snprintf(buf, sizeof buf, "episode %d  reward %.3f  samples %d  deviation %.4f", e.episode + 1,
                    e.cumulative_reward, e.samples, e.mean_deviation);
      info(buf);
    }
  };
  const auto result = run_training(cfg, clips, start ? &*start : nullptr, progress);

  ArtifactWriter w(cfg.output_dir);
  w.write("snapshot.json", networks_to_json(result.networks));
  w.write("curves.csv", curves_to_csv(result.curves));
  w.write("config.json", experiment_to_json(cfg));
  w.write_manifest("train", cfg, seconds_since(t0));
  info("wrote " + cfg.output_dir + "/snapshot.json and curves.csv");
  return 0;
}

std::string safe_name(std::string s) {
  for (char& ch : s) {
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '_') ch = '_';
  }
  return s;
}

int cmd_evaluate(const Common& c, bool dump_layouts) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg = load_config(c);
  if (c.snapshot.empty()) throw UsageError("--snapshot is required");
  const SacNetworks nets = [&] {
    try {
      return networks_from_json(read_file(c.snapshot));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }();

  std::vector<FootageClip> clips;
  if (!c.clips.empty()) {
    for (const auto& p : c.clips) {
      const auto ext = std::filesystem::path(p).extension().string();
      clips.push_back(ext == ".xml" ? load_detrac_xml(p) : load_clip_json(p));
      if (clips.back().name.empty()) clips.back().name = std::filesystem::path(p).stem().string();
    }
  } else {
    clips = load_clips(cfg.eval_clips, cfg.base_dir);
  }
  if (clips.empty()) throw UsageError("no evaluation clips");
  if (cfg.eval_offsets.size() != 1 && cfg.eval_offsets.size() != clips.size()) cfg.eval_offsets = {cfg.eval_offsets[0]};
  cfg.episode.record_layouts = dump_layouts;

  const auto rows = run_evaluation(cfg, nets, clips, c.jobs);
  ArtifactWriter w(cfg.output_dir);
  w.write("comparison.csv", comparison_to_csv(rows));
  w.write("comparison.json", comparison_to_json(rows));
  for (const auto& r : rows) {
    const std::string stem = safe_name(r.clip) + "__" + safe_name(r.policy);
    w.write("trace_" + stem + ".jsonl", trace_to_jsonl(r.metrics));
    if (dump_layouts) w.write("layouts_" + stem + ".json", layouts_to_json(r.metrics.displayed));
  }
  w.write_manifest("evaluate", cfg, seconds_since(t0));
  std::cout << comparison_to_csv(rows);
  return 0;
}

int cmd_channel_check(double m, double m_s, std::size_t draws, std::uint64_t seed, double bits) {
  FadingParams f{m, m_s, 1.0};
  try {
    f.validate();
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  if (!(m > 1.0)) throw UsageError("m must exceed 1 for a finite inverse moment");
  const LinkBudget link;
  FadingParams linked = f;
  linked.g_bar = link.g_bar();

  bool ok = true;
  auto line = [&](const char* what, double closed, double other, double tol, const char* how) {
    const double rel = std::abs(other - closed) / std::abs(closed);
    const bool pass = rel <= tol;
    ok = ok && pass;
    std::printf("%-22s closed %.10g  %-11s %.10g  rel %.2e  tol %.0e  %s\n", what, closed, how, other, rel, tol,
                pass ? "ok" : "FAIL");
  };

  std::printf("F fading m = %g, m_s = %g; link g_bar = %.6g, theta = %.6g, noise = %.6g W, R = %.6g bit/s\n", m, m_s,
              link.g_bar(), link.snr_threshold(), link.noise_power_w(), rate_bits_per_s(link));
  const double norm = quadrature_probability(f, 0.0, std::numeric_limits<double>::infinity());
  std::printf("%-22s quadrature %.12f  %s\n", "pdf normalization", norm, std::abs(norm - 1.0) <= 1e-6 ? "ok" : "FAIL");
  ok = ok && std::abs(norm - 1.0) <= 1e-6;

  line("mean", moment(f, 1.0), quadrature_moment(f, 1.0), 1e-6, "quadrature");
  line("inverse moment", moment(f, -1.0), quadrature_moment(f, -1.0), 1e-6, "quadrature");
  line("inverse moment", moment(f, -1.0), monte_carlo_inverse_moment(f, draws, seed), 0.02, "monte-carlo");
  std::printf("%-22s %.12g\n", "E[1/g] * g_bar", moment(f, -1.0) * f.g_bar);

  const double delta = transmission_duration(bits, link);
  const double closed = expected_energy(bits, link, linked);
  const double via_moment = delta * link.snr_threshold() * link.noise_power_w() * moment(linked, -1.0);
  line("energy identity", closed, via_moment, 1e-12, "moment");
  const double mc = delta * link.snr_threshold() * link.noise_power_w() *
                    monte_carlo_inverse_moment(linked, draws, seed + 1);
  line("energy", closed, mc, 0.02, "monte-carlo");
  std::printf("%-22s %.6g J for %g bits (delta %.6g s)\n", "expected energy", closed, bits, delta);
  return ok ? 0 : kExitRuntime;
}

int cmd_ingest(const std::string& xml, const std::string& out, int width, int height) {
  FootageClip clip;
  try {
    clip = load_detrac_xml(xml, width, height);
  } catch (const ParseError& e) {
    std::cerr << xml << ":" << e.line() << ":" << e.column() << ": " << e.what() << "\n";
    return kExitUsage;
  }
  if (clip.name.empty()) clip.name = std::filesystem::path(xml).stem().string();
  const std::string text = clip_to_json(clip);
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + out);
    f << text;
  }
  std::size_t vehicles = 0;
  std::array<std::size_t, kNumClasses + 1> hist{};
  for (const auto& s : clip.frames) {
    vehicles += s.vehicles.size();
    for (const auto& v : s.vehicles) ++hist[static_cast<std::size_t>(code(v.cls))];
  }
  std::fprintf(stderr, "frames %zu  vehicles %zu  car %zu  bus %zu  van %zu  others %zu  fnv1a64 %s\n",
               clip.frames.size(), vehicles, hist[1], hist[2], hist[3], hist[4], digest_hex(text).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic sampling simulator"};
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "Experiment config (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--seed", common.seed, "Override every seed");
    sub->add_option("--out", common.out, "Output directory");
    sub->add_option("--jobs", common.jobs, "Parallel episode workers")->check(CLI::PositiveNumber);
  };

  auto* train = app.add_subcommand("train", "Train the sampling agent");
  add_common(train);
  std::string resume;
  train->add_option("--episodes", common.episodes, "Override the number of training episodes");
  train->add_option("--resume", resume, "Continue from a snapshot")->check(CLI::ExistingFile);

  auto* evaluate = app.add_subcommand("evaluate", "Compare the agent with periodic sampling");
  add_common(evaluate);
  bool dump_layouts = false;
  evaluate->add_option("--snapshot", common.snapshot, "Trained snapshot")->check(CLI::ExistingFile);
  evaluate->add_option("--clips", common.clips, "Clip files (.xml or .json) replacing the configured ones");
  evaluate->add_flag("--dump-layouts", dump_layouts, "Write displayed layouts per episode");

  auto* show = app.add_subcommand("show-config", "Print the resolved experiment config");
  add_common(show);

  auto* channel = app.add_subcommand("channel-check", "Closed form vs quadrature vs Monte Carlo");
  double m = 6.0, m_s = 6.0, bits = 22.0 * 8;
  std::size_t draws = 1000000;
  std::uint64_t seed = 1;
  channel->add_option("--m", m, "Multipath shape");
  channel->add_option("--ms", m_s, "Shadowing shape");
  channel->add_option("--draws", draws, "Monte Carlo draws");
  channel->add_option("--seed", seed, "Monte Carlo seed");
  channel->add_option("--bits", bits, "Packet size for the energy lines");

  auto* ingest = app.add_subcommand("ingest", "Convert a DETRAC annotation file to clip JSON");
  std::string xml, out;
  int width = 960, height = 540;
  ingest->add_option("xml", xml, "Annotation file")->required();
  ingest->add_option("--out", out, "Output JSON (default stdout)");
  ingest->add_option("--width", width, "Source frame width");
  ingest->add_option("--height", height, "Source frame height");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*train) return cmd_train(common, resume);
    if (*evaluate) return cmd_evaluate(common, dump_layouts);
    if (*show) {
      std::cout << experiment_to_json(load_config(common)) << "\n";
      return 0;
    }
    if (*channel) return cmd_channel_check(m, m_s, draws, seed, bits);
    if (*ingest) return cmd_ingest(xml, out, width, height);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what();
    if (e.line() > 0) std::cerr << " (line " << e.line() << ", column " << e.column() << ")";
    std::cerr << "\n";
    return kExitUsage;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DivergenceError& e) {
    std::cerr << "training diverged: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
