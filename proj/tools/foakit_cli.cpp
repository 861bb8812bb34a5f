// Copyright 2026 The foakit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// foakit command-line tool. Results go to stdout as key=value lines,
// preceded by config.<option>=<value> lines for the resolved flags.
// Failures print one line, "error=<Name> message=<text>", to stderr and
// exit with 1 (domain errors) or 2 (usage errors).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "foakit/audio_io.hpp"
#include "foakit/conditioning.hpp"
#include "foakit/data_pipeline.hpp"
#include "foakit/fixtures.hpp"
#include "foakit/flow_matching.hpp"
#include "foakit/foa.hpp"
#include "foakit/image_io.hpp"
#include "foakit/manifest.hpp"
#include "foakit/matrix_io.hpp"
#include "foakit/metrics.hpp"
#include "foakit/pano.hpp"
#include "foakit/stft.hpp"
#include "foakit/training.hpp"
#include "foakit/velocity_model.hpp"

namespace {

using namespace foakit;

constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

void print_kv(const std::string& key, double v, int precision = 17) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  std::cout << key << '=' << s.str() << '\n';
}

void print_fixed(const std::string& key, double v, int decimals) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(decimals) << v;
  std::cout << key << '=' << s.str() << '\n';
}

/// Echoes every option of the selected subcommand, resolved or default.
void print_config(const CLI::App& sub) {
  std::cout << "config.subcommand=" << sub.get_name() << '\n';
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_name() == "--help") continue;
    std::string name = opt->get_single_name();
    std::string value;
    if (opt->count() > 0) {
      for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
      if (value.empty()) value = "true";
    } else {
      value = opt->get_default_str();
      if (opt->get_expected_max() == 0) value = "false";  // unset flag
    }
    std::cout << "config." << name << '=' << value << '\n';
  }
}

struct Angles {
  double theta = 0.0;
  double phi = 0.0;
  bool degrees = false;
};

Direction to_direction(const Angles& a) {
  return a.degrees ? Direction(deg_to_rad(a.theta), deg_to_rad(a.phi))
                   : Direction(a.theta, a.phi);
}

double out_angle(double rad, bool degrees) { return degrees ? rad_to_deg(rad) : rad; }

struct EncodingOpts {
  std::string encoding = "float32";
  bool ambix = false;
};

void add_encoding_opts(CLI::App* sub, EncodingOpts& o) {
  sub->add_option("--encoding", o.encoding, "Output sample encoding")
      ->check(CLI::IsMember({"float32", "pcm16"}))
      ->capture_default_str();
  sub->add_flag("--ambix", o.ambix, "Use ACN/SN3D channel order for 4-channel files");
}

std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw CLI::ValidationError("list", "malformed number '" + tok + "'");
    }
  }
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& csv) {
  std::vector<std::size_t> out;
  for (double v : parse_list(csv)) {
    if (v < 1 || v != static_cast<double>(static_cast<std::size_t>(v))) {
      throw CLI::ValidationError("list", "expected positive integers, got " + csv);
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

double mean_of(const std::vector<double>& v, std::size_t begin, std::size_t end) {
  return std::accumulate(v.begin() + static_cast<std::ptrdiff_t>(begin),
                         v.begin() + static_cast<std::ptrdiff_t>(end), 0.0) /
         static_cast<double>(end - begin);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"foakit: spatial audio, panorama and flow-matching toolkit"};
  app.require_subcommand(1);
  app.fallthrough(false);
  std::function<void()> run;

  // spatialize -------------------------------------------------------------
  Angles sp_angles;
  EncodingOpts sp_enc;
  std::string sp_in, sp_out;
  auto* sp = app.add_subcommand("spatialize", "Encode a mono file into 4-channel FOA");
  sp->add_option("input", sp_in, "Mono WAV file")->required();
  sp->add_option("output", sp_out, "FOA WAV file to write")->required();
  sp->add_option("--theta", sp_angles.theta, "Azimuth (radians; left positive)")->capture_default_str();
  sp->add_option("--phi", sp_angles.phi, "Elevation (radians; up positive)")->capture_default_str();
  sp->add_flag("--degrees", sp_angles.degrees, "Angles are given in degrees");
  add_encoding_opts(sp, sp_enc);
  sp->callback([&] {
    run = [&] {
      const auto mono = expect_signal<MonoSignal>(read_wav(sp_in), sp_in);
      const FoaSignal foa = spatialize_mono(mono, to_direction(sp_angles));
      write_wav(foa, sp_out, {4, foa.sample_rate(), parse_encoding(sp_enc.encoding)},
                sp_enc.ambix);
      std::cout << "samples=" << foa.size() << '\n' << "output=" << sp_out << '\n';
    };
  });

  // stereo2foa -------------------------------------------------------------
  EncodingOpts st_enc;
  std::string st_in, st_out;
  auto* st = app.add_subcommand("stereo2foa", "Convert stereo to FOA (W = L + R, X = L - R)");
  st->add_option("input", st_in, "Stereo WAV file")->required();
  st->add_option("output", st_out, "FOA WAV file to write")->required();
  add_encoding_opts(st, st_enc);
  st->callback([&] {
    run = [&] {
      const auto stereo = expect_signal<StereoSignal>(read_wav(st_in), st_in);
      const FoaSignal foa = stereo_to_foa(stereo);
      write_wav(foa, st_out, {4, foa.sample_rate(), parse_encoding(st_enc.encoding)},
                st_enc.ambix);
      std::cout << "samples=" << foa.size() << '\n' << "output=" << st_out << '\n';
    };
  });

  // doa --------------------------------------------------------------------
  std::string doa_in;
  bool doa_ambix = false;
  auto* doa = app.add_subcommand("doa", "Estimate the direction of arrival of an FOA file");
  doa->add_option("input", doa_in, "FOA WAV file")->required();
  doa->add_flag("--ambix", doa_ambix, "Input uses ACN/SN3D channel order");
  doa->callback([&] {
    run = [&] {
      const auto foa = expect_signal<FoaSignal>(read_wav(doa_in, doa_ambix), doa_in);
      const Direction d = estimate_doa(foa);
      print_fixed("theta", rad_to_deg(d.azimuth()), 3);
      print_fixed("phi", rad_to_deg(d.elevation()), 3);
      print_kv("theta_rad", d.azimuth());
      print_kv("phi_rad", d.elevation());
    };
  });

  // eval-doa ---------------------------------------------------------------
  std::string ed_pairs;
  std::size_t ed_jobs = 1;
  bool ed_degrees = false, ed_ambix = false;
  auto* ed = app.add_subcommand("eval-doa", "Mean DoA errors over ground-truth/estimate FOA pairs");
  ed->add_option("pairs", ed_pairs, "Text file, one '<ground-truth.wav> <estimate.wav>' per line")
      ->required();
  ed->add_option("--jobs", ed_jobs, "Worker threads")->envname("FOAKIT_JOBS")
      ->check(CLI::PositiveNumber)->capture_default_str();
  ed->add_flag("--degrees", ed_degrees, "Report errors in degrees");
  ed->add_flag("--ambix", ed_ambix, "Inputs use ACN/SN3D channel order");
  ed->callback([&] {
    run = [&] {
      std::ifstream in(ed_pairs);
      if (!in) detail::fail(ErrorCode::IoFailure, "cannot open '" + ed_pairs + "'");
      const std::filesystem::path base = std::filesystem::path(ed_pairs).parent_path();
      std::vector<std::pair<FoaSignal, FoaSignal>> pairs;
      std::string line;
      std::size_t lineno = 0;
      while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string a, b, extra;
        if (!(ls >> a)) continue;
        if (!(ls >> b) || (ls >> extra)) {
          detail::fail(ErrorCode::ParseError,
                       ed_pairs + ": line " + std::to_string(lineno) + ": expected two paths");
        }
        a = detail::resolve_path(base, a);
        b = detail::resolve_path(base, b);
        pairs.emplace_back(expect_signal<FoaSignal>(read_wav(a, ed_ambix), a),
                           expect_signal<FoaSignal>(read_wav(b, ed_ambix), b));
      }
      const DoaBatchResult r = eval_doa_batch(pairs, ed_jobs);
      print_kv("d_theta", out_angle(r.mean.d_theta, ed_degrees));
      print_kv("d_phi", out_angle(r.mean.d_phi, ed_degrees));
      print_kv("d_angular", out_angle(r.mean.d_angular, ed_degrees));
      std::cout << "evaluated=" << r.evaluated << '\n' << "excluded=" << r.excluded << '\n';
    };
  });

  // eval-fd ----------------------------------------------------------------
  std::string fd_a, fd_b;
  auto* fd = app.add_subcommand("eval-fd", "Frechet distance between two feature sets");
  fd->add_option("features_a", fd_a, "N x d feature matrix (binary container or text)")->required();
  fd->add_option("features_b", fd_b, "M x d feature matrix")->required();
  fd->callback([&] {
    run = [&] {
      const FeatureSet a(load_matrix(fd_a));
      const FeatureSet b(load_matrix(fd_b));
      print_kv("fd", frechet_distance(a, b));
      std::cout << "n_a=" << a.vectors().rows() << '\n' << "n_b=" << b.vectors().rows() << '\n';
    };
  });

  // eval-kl ----------------------------------------------------------------
  std::string kl_p, kl_q;
  bool kl_normalize = false;
  auto* kl = app.add_subcommand("eval-kl", "KL(p || q) between two label distributions");
  kl->add_option("p", kl_p, "Probabilities, one row or one column")->required();
  kl->add_option("q", kl_q, "Probabilities, one row or one column")->required();
  kl->add_flag("--normalize", kl_normalize, "Rescale non-negative weights to sum to 1");
  kl->callback([&] {
    run = [&] {
      auto load = [&](const std::string& path) {
        const Eigen::MatrixXd m = load_matrix(path);
        if (m.rows() != 1 && m.cols() != 1) {
          detail::fail(ErrorCode::ParseError, path + ": expected a single row or column");
        }
        std::vector<double> v(m.data(), m.data() + m.size());
        return kl_normalize ? LabelDist::normalized(std::move(v)) : LabelDist(std::move(v));
      };
      print_kv("kl", kl_divergence(load(kl_p), load(kl_q)));
    };
  });

  // eval-stft --------------------------------------------------------------
  std::string stft_est, stft_ref, stft_windows = "512,1024,2048";
  double stft_hop = 0.25;
  bool stft_ambix = false;
  auto* es = app.add_subcommand("eval-stft", "Multi-resolution STFT distance between FOA files");
  es->add_option("estimate", stft_est, "Estimated FOA WAV")->required();
  es->add_option("reference", stft_ref, "Reference FOA WAV")->required();
  es->add_option("--windows", stft_windows, "Comma-separated window sizes")->capture_default_str();
  es->add_option("--hop-fraction", stft_hop, "Hop as a fraction of the window")->capture_default_str();
  es->add_flag("--ambix", stft_ambix, "Inputs use ACN/SN3D channel order");
  es->callback([&] {
    run = [&] {
      StftConfig cfg;
      cfg.window_sizes = parse_sizes(stft_windows);
      cfg.hop_fraction = stft_hop;
      const auto a = expect_signal<FoaSignal>(read_wav(stft_est, stft_ambix), stft_est);
      const auto b = expect_signal<FoaSignal>(read_wav(stft_ref, stft_ambix), stft_ref);
      print_kv("stft", multires_stft_distance(a, b, cfg));
    };
  });

  // cut-fov ----------------------------------------------------------------
  std::string cf_in, cf_prefix, cf_preset = "front", cf_ext = "ppm";
  double cf_hfov = 120.0;
  std::size_t cf_w = 512, cf_h = 512, cf_jobs = 1;
  auto* cf = app.add_subcommand("cut-fov", "Perspective cuts from an equirectangular frame");
  cf->add_option("input", cf_in, "ERP frame (PGM/PPM or raw frame container)")->required();
  cf->add_option("output_prefix", cf_prefix, "Writes <prefix>_<view>.<ext>")->required();
  cf->add_option("--preset", cf_preset, "View set")
      ->check(CLI::IsMember({"front", "2cuts", "4cuts", "6cuts"}))->capture_default_str();
  cf->add_option("--hfov", cf_hfov, "Horizontal field of view (degrees)")->capture_default_str();
  cf->add_option("--width", cf_w, "Output width")->check(CLI::PositiveNumber)->capture_default_str();
  cf->add_option("--height", cf_h, "Output height")->check(CLI::PositiveNumber)->capture_default_str();
  cf->add_option("--format", cf_ext, "Output file type")
      ->check(CLI::IsMember({"ppm", "pgm", "fkf"}))->capture_default_str();
  cf->add_option("--jobs", cf_jobs, "Worker threads")->envname("FOAKIT_JOBS")
      ->check(CLI::PositiveNumber)->capture_default_str();
  cf->callback([&] {
    run = [&] {
      const Frame erp = load_frame(cf_in);
      const CutPreset preset = parse_cut_preset(cf_preset);
      const auto views = preset_views(preset);
      const auto frames = make_fov_cuts(erp, preset, deg_to_rad(cf_hfov), cf_w, cf_h, cf_jobs);
      std::string ext = cf_ext;
      if (ext != "fkf") ext = erp.channels() == 1 ? "pgm" : "ppm";
      for (std::size_t i = 0; i < frames.size(); ++i) {
        const std::string path = cf_prefix + "_" + views[i].name + "." + ext;
        save_frame(path, frames[i]);
        std::cout << "view." << views[i].name << '=' << path << '\n';
      }
      std::cout << "views=" << frames.size() << '\n';
    };
  });

  // pad-erp ----------------------------------------------------------------
  std::string pe_in, pe_out;
  auto* pe = app.add_subcommand("pad-erp", "Zero-pad a 2:1 ERP frame to a square");
  pe->add_option("input", pe_in, "ERP frame")->required();
  pe->add_option("output", pe_out, "Output frame (.pgm/.ppm or raw container)")->required();
  pe->callback([&] {
    run = [&] {
      const Frame out = pad_to_square(load_frame(pe_in));
      save_frame(pe_out, out);
      std::cout << "height=" << out.height() << '\n' << "width=" << out.width() << '\n';
    };
  });

  // clean ------------------------------------------------------------------
  std::string cl_manifest, cl_report, cl_preset = "default";
  FilterThresholds cl_th;
  std::size_t cl_jobs = 1;
  bool cl_table = false;
  auto* cl = app.add_subcommand("clean", "Apply the cleaning filters to a clip manifest");
  cl->add_option("manifest", cl_manifest, "JSONL clip manifest")->required();
  cl->add_option("--report", cl_report, "Write the per-entry JSONL report here");
  cl->add_option("--preset", cl_preset,
                 "Alignment preset: default (min 1.0) or strict (min 2.0); "
                 "--min-alignment overrides")
      ->check(CLI::IsMember({"default", "strict"}))->capture_default_str();
  auto* min_align = cl->add_option("--min-alignment", cl_th.min_alignment,
                                   "Remove entries scoring below this")->capture_default_str();
  cl->add_option("--silence-dbfs", cl_th.silence_dbfs, "Silent-window level (dBFS)")
      ->capture_default_str();
  cl->add_option("--silence-ratio", cl_th.silence_ratio, "Silent when the silent share exceeds this")
      ->capture_default_str();
  cl->add_option("--stationary-ratio", cl_th.stationary_ratio,
                 "Stationary when the still share exceeds this")->capture_default_str();
  cl->add_option("--stationary-mse", cl_th.stationary_mse, "Per-comparison MSE threshold")
      ->capture_default_str();
  cl->add_option("--stationary-interval", cl_th.stationary_interval_s,
                 "Seconds between compared frames")->capture_default_str();
  cl->add_option("--max-words", cl_th.max_words, "Remove entries with more words")
      ->capture_default_str();
  cl->add_option("--window-ms", cl_th.window_ms, "Silence window length")->capture_default_str();
  cl->add_option("--hop-ms", cl_th.hop_ms, "Silence window hop (0 = window)")->capture_default_str();
  cl->add_option("--jobs", cl_jobs, "Worker threads")->envname("FOAKIT_JOBS")
      ->check(CLI::PositiveNumber)->capture_default_str();
  cl->add_flag("--table", cl_table, "Also print a human-readable table");
  cl->callback([&] {
    if (cl_preset == "strict" && min_align->count() == 0) cl_th.min_alignment = kStrictAlignment;
    run = [&] {
      const auto entries = load_manifest(cl_manifest);
      const auto loaders =
          file_loaders(std::filesystem::path(cl_manifest).parent_path());
      const FilterReport report = run_pipeline(entries, cl_th, loaders, cl_jobs);
      if (!cl_report.empty()) {
        std::ofstream out(cl_report);
        if (!out) detail::fail(ErrorCode::IoFailure, "cannot create '" + cl_report + "'");
        write_report(out, report);
      }
      print_kv("effective.min_alignment", cl_th.min_alignment);
      std::cout << "entries=" << report.entries.size() << '\n'
                << "kept=" << report.kept().size() << '\n'
                << "removed=" << report.removed().size() << '\n';
      for (const auto& [name, n] : report.counts()) std::cout << "count." << name << '=' << n << '\n';
      for (const auto& o : report.entries) {
        std::string reasons;
        for (const auto& r : o.reasons) reasons += (reasons.empty() ? "" : ",") + r;
        std::cout << "entry." << o.id << '=' << (o.kept() ? "kept" : "removed:" + reasons) << '\n';
      }
      if (cl_table) print_report_table(std::cout, report);
    };
  });

  // segment ----------------------------------------------------------------
  std::string sg_manifest;
  double sg_seconds = 10.0;
  auto* sg = app.add_subcommand("segment", "Split manifest entries into fixed-length clips");
  sg->add_option("manifest", sg_manifest, "JSONL clip manifest")->required();
  sg->add_option("--clip-seconds", sg_seconds, "Clip length")->capture_default_str();
  sg->callback([&] {
    run = [&] {
      std::size_t total = 0;
      for (const auto& e : load_manifest(sg_manifest)) {
        const auto spans = segment_clips(e, sg_seconds);
        for (const auto& s : spans) {
          std::cout << "clip." << e.id << '.' << s.index << '=' << s.start_s << ',' << s.end_s
                    << ',' << s.start_sample << ',' << s.sample_count << '\n';
        }
        std::cout << "clips." << e.id << '=' << spans.size() << '\n';
        total += spans.size();
      }
      std::cout << "clips=" << total << '\n';
    };
  });

  // mask-stats -------------------------------------------------------------
  MaskSpec ms_spec;
  std::size_t ms_frames = 64, ms_draws = 10000;
  std::uint64_t ms_seed = 0;
  auto* ms = app.add_subcommand("mask-stats", "Empirical statistics of the span-mask sampler");
  ms->add_option("--frames", ms_frames, "Latent length T")->capture_default_str();
  ms->add_option("--draws", ms_draws, "Number of masks to draw")->capture_default_str();
  ms->add_option("--p-cond", ms_spec.p_cond, "Partial-mask probability")->capture_default_str();
  ms->add_option("--n-mask", ms_spec.n_mask, "Spans per partial mask")->capture_default_str();
  ms->add_option("--l-mask", ms_spec.l_mask, "Minimum span length")->capture_default_str();
  ms->add_option("--seed", ms_seed, "Random seed")->capture_default_str();
  ms->callback([&] {
    run = [&] {
      Rng rng(ms_seed);
      std::size_t partial = 0, bad = 0, hidden_partial = 0;
      for (std::size_t i = 0; i < ms_draws; ++i) {
        const MaskDraw d = make_mask(ms_frames, ms_spec, rng);
        if (d.full) continue;
        ++partial;
        hidden_partial += d.masked_count();
        const auto runs = mask_runs(d.mask);
        bool ok = runs.size() == ms_spec.n_mask;
        for (const auto& [b, e] : runs) ok = ok && e - b >= ms_spec.l_mask;
        if (!ok) ++bad;
      }
      print_kv("partial_fraction", static_cast<double>(partial) / static_cast<double>(ms_draws));
      std::cout << "partial=" << partial << '\n' << "invalid_partial=" << bad << '\n';
      print_kv("mean_hidden_frames_partial",
               partial ? static_cast<double>(hidden_partial) / static_cast<double>(partial) : 0.0);
    };
  });

  // fm-train ---------------------------------------------------------------
  std::string ft_fixture = "mixture", ft_latents, ft_conds, ft_out = "model.fkv", ft_trace,
              ft_hidden = "32,32,32", ft_time = "logit-normal";
  std::size_t ft_frames = 1, ft_per_class = 500;
  TrainConfig ft_cfg;
  ft_cfg.batch_size = 128;
  ft_cfg.steps = 10000;
  ft_cfg.seed = 3;
  ft_cfg.cond_drop = 0.1;
  bool ft_mask = false;
  MaskSpec ft_mask_spec;
  std::uint64_t ft_init_seed = 0, ft_data_seed = 7;
  auto* ft = app.add_subcommand("fm-train", "Train a flow-matching velocity model");
  ft->add_option("--fixture", ft_fixture,
                 "Built-in data when --latents is absent: mixture (2 classes, 2-D) or point")
      ->check(CLI::IsMember({"mixture", "point"}))->capture_default_str();
  ft->add_option("--per-class", ft_per_class, "Mixture examples per class")->capture_default_str();
  ft->add_option("--data-seed", ft_data_seed, "Seed for the built-in data")->capture_default_str();
  ft->add_option("--latents", ft_latents, "N x (T*D) matrix of training latents");
  ft->add_option("--conditions", ft_conds, "N x E matrix of per-example global conditions");
  ft->add_option("--frames", ft_frames, "Frames T per latent row")->check(CLI::PositiveNumber)
      ->capture_default_str();
  ft->add_option("--hidden", ft_hidden, "Hidden-layer widths")->capture_default_str();
  ft->add_option("--init-seed", ft_init_seed, "Weight initialisation seed")->capture_default_str();
  ft->add_option("--seed", ft_cfg.seed, "Training seed")->capture_default_str();
  ft->add_option("--steps", ft_cfg.steps, "SGD steps")->capture_default_str();
  ft->add_option("--batch", ft_cfg.batch_size, "Batch size")->capture_default_str();
  ft->add_option("--lr", ft_cfg.learning_rate, "Learning rate")->capture_default_str();
  ft->add_option("--cond-drop", ft_cfg.cond_drop,
                 "Probability of zeroing the external condition (trains the guidance branch)")
      ->capture_default_str();
  ft->add_option("--time-sampler", ft_time, "Flow-time distribution")
      ->check(CLI::IsMember({"logit-normal", "uniform"}))->capture_default_str();
  ft->add_flag("--mask", ft_mask, "Enable masked-latent conditioning");
  ft->add_option("--p-cond", ft_mask_spec.p_cond, "Partial-mask probability")->capture_default_str();
  ft->add_option("--n-mask", ft_mask_spec.n_mask, "Spans per partial mask")->capture_default_str();
  ft->add_option("--l-mask", ft_mask_spec.l_mask, "Minimum span length")->capture_default_str();
  ft->add_option("--out", ft_out, "Checkpoint path")->capture_default_str();
  ft->add_option("--loss-trace", ft_trace, "Write the per-step loss as TSV");
  ft->callback([&] {
    run = [&] {
      std::vector<TrainExample> data;
      if (!ft_latents.empty()) {
        const Eigen::MatrixXd lat = load_matrix(ft_latents);
        const auto t = static_cast<Eigen::Index>(ft_frames);
        if (lat.rows() == 0 || lat.cols() % t != 0) {
          detail::fail(ErrorCode::ShapeMismatch, "latent columns must be a multiple of --frames");
        }
        Eigen::MatrixXd cond(lat.rows(), 0);
        if (!ft_conds.empty()) cond = load_matrix(ft_conds);
        if (cond.rows() != lat.rows()) {
          detail::fail(ErrorCode::ShapeMismatch, "conditions and latents differ in row count");
        }
        const Eigen::Index d = lat.cols() / t;
        for (Eigen::Index i = 0; i < lat.rows(); ++i) {
          RowMatrix x(t, d);
          for (Eigen::Index k = 0; k < lat.cols(); ++k) x.data()[k] = lat(i, k);
          RowMatrix ext = cond.row(i).replicate(t, 1);
          data.push_back({LatentSeq(std::move(x)), std::move(ext)});
        }
      } else if (ft_fixture == "mixture") {
        data = fixtures::GaussianMixture::dataset(ft_per_class, ft_data_seed);
      } else {
        data = fixtures::point_mass({1.5, -0.5});
      }
      ft_cfg.time_sampler =
          ft_time == "uniform" ? TimeSampler::uniform() : TimeSampler::logit_normal();
      if (ft_mask) ft_cfg.mask = ft_mask_spec;
      const auto d = static_cast<std::size_t>(data.front().x1.dim());
      const auto e = static_cast<std::size_t>(data.front().external.cols());
      VelocityModel model(d, (ft_mask ? d : 0) + e, parse_sizes(ft_hidden), ft_init_seed);
      const TrainResult r = train(std::move(model), data, ft_cfg);
      r.model.save(ft_out);
      if (!ft_trace.empty()) {
        std::ofstream out(ft_trace);
        if (!out) detail::fail(ErrorCode::IoFailure, "cannot create '" + ft_trace + "'");
        write_loss_trace(out, r.loss_trace);
      }
      const std::size_t n = r.loss_trace.size();
      const std::size_t w = std::min<std::size_t>(100, n);
      std::cout << "examples=" << data.size() << '\n'
                << "parameters=" << r.model.params().parameter_count() << '\n';
      print_kv("loss_leading", mean_of(r.loss_trace, 0, w));
      print_kv("loss_trailing", mean_of(r.loss_trace, n - w, n));
      print_kv("final_loss", r.loss_trace.back());
      std::cout << "model=" << ft_out << '\n';
    };
  });

  // fm-sample --------------------------------------------------------------
  std::string fs_model = "model.fkv", fs_cond, fs_out;
  std::size_t fs_count = 1000, fs_steps = 50, fs_frames = 1;
  double fs_cfg = 5.0;
  int fs_class = -1;
  std::uint64_t fs_seed = 0;
  auto* fs = app.add_subcommand("fm-sample", "Draw latents from a trained model");
  fs->add_option("--model", fs_model, "Checkpoint written by fm-train")->capture_default_str();
  fs->add_option("--count", fs_count, "Number of samples")->check(CLI::PositiveNumber)
      ->capture_default_str();
  fs->add_option("--steps", fs_steps, "Euler steps")->check(CLI::PositiveNumber)->capture_default_str();
  fs->add_option("--frames", fs_frames, "Frames T per sample")->check(CLI::PositiveNumber)
      ->capture_default_str();
  fs->add_option("--cfg", fs_cfg, "Guidance scale (1 = conditional field only)")
      ->capture_default_str();
  fs->add_option("--condition", fs_cond, "1 x E external condition (matrix file)");
  fs->add_option("--class", fs_class, "Use the mixture fixture condition of this class")
      ->capture_default_str();
  fs->add_option("--seed", fs_seed, "Sampling seed")->capture_default_str();
  fs->add_option("--out", fs_out, "Write count x (T*D) samples (binary matrix container)");
  fs->callback([&] {
    run = [&] {
      const VelocityModel model = VelocityModel::load(fs_model);
      const auto d = static_cast<Eigen::Index>(model.latent_dim());
      const auto c = static_cast<Eigen::Index>(model.cond_dim());
      const auto t = static_cast<Eigen::Index>(fs_frames);
      Eigen::RowVectorXd ext(0);
      if (!fs_cond.empty()) {
        const Eigen::MatrixXd m = load_matrix(fs_cond);
        if (m.rows() != 1) detail::fail(ErrorCode::ShapeMismatch, "condition must be one row");
        ext = m.row(0);
      } else if (fs_class >= 0) {
        ext = fixtures::GaussianMixture::condition(fs_class, fs_seed).row(0);
      }
      // A model trained with masked-latent conditioning takes [latent | ext];
      // the latent part is fully hidden (zero) when sampling from scratch.
      if (ext.size() != c && ext.size() + d != c) {
        detail::fail(ErrorCode::ShapeMismatch,
                     "condition has " + std::to_string(ext.size()) +
                         " columns; model expects " + std::to_string(c));
      }
      RowMatrix cond = RowMatrix::Zero(t, c);
      if (ext.size() > 0) cond.rightCols(ext.size()) = ext.replicate(t, 1);

      Rng rng(fs_seed);
      std::optional<CfgSpec> guidance;
      if (fs_cfg != 1.0) guidance = CfgSpec{fs_cfg};
      Eigen::MatrixXd samples(static_cast<Eigen::Index>(fs_count), t * d);
      for (std::size_t i = 0; i < fs_count; ++i) {
        const LatentSeq x = euler_sample(model, cond, t, d, fs_steps, guidance, rng);
        for (Eigen::Index k = 0; k < t * d; ++k) {
          samples(static_cast<Eigen::Index>(i), k) = x.data().data()[k];
        }
      }
      if (!fs_out.empty()) save_matrix(fs_out, samples);
      std::cout << "samples=" << fs_count << '\n';
      for (Eigen::Index k = 0; k < d; ++k) {
        double sum = 0.0;
        for (Eigen::Index f = 0; f < t; ++f) sum += samples.col(f * d + k).sum();
        print_kv("mean." + std::to_string(k), sum / static_cast<double>(fs_count * fs_frames));
      }
    };
  });

  for (auto* sub : app.get_subcommands({})) sub->fallthrough(false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error=Usage message=" << one_line(e.what()) << '\n';
    return kExitUsage;
  }

  try {
    print_config(*app.get_subcommands().front());
    run();
  } catch (const foakit::Error& e) {
    std::cerr << "error=" << e.name() << " message=" << one_line(e.detail()) << '\n';
    return kExitDomain;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error=Usage message=" << one_line(e.what()) << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error=IoFailure message=" << one_line(e.what()) << '\n';
    return kExitDomain;
  }
  return 0;
}
