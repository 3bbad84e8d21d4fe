// tools/vaemm.cpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Command-line front end: enhance a noisy WAV with a model bundle and
// visual embeddings, generate synthetic scenes, and score results.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "vaemm/manifest.hpp"
#include "vaemm/metrics.hpp"
#include "vaemm/synth.hpp"
#include "vaemm/vem.hpp"
#include "vaemm/wav.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

struct EnhanceArgs {
  std::string input, visual, model, output;
  std::string trace_dir;
  std::string mode = "mix";
  std::string window = "sqrt_hann";
  int iters = 200;
  int mh_iters = 40;
  int mh_burnin = 30;
  double epsilon = 0.01;
  int nmf_rank = 8;
  std::uint64_t seed = 0;
  int threads = 1;
  int fft_size = 1024;
  int hop = 256;
  double stop_rel_q = 0.0;  // 0 disables the early stop
};

int cmd_enhance(const EnhanceArgs& args) {
  const vaemm::Mode mode = vaemm::mode_from_string(args.mode);
  if (mode != vaemm::Mode::kAudioOnly && args.visual.empty())
    throw vaemm::ValidationError("visual embeddings required for mode " + args.mode);

  const vaemm::AudioSignal noisy = vaemm::read_wav(args.input);
  vaemm::StftParams params;
  params.fft_size = args.fft_size;
  params.hop = args.hop;
  params.window = vaemm::window_from_string(args.window);
  const vaemm::Spectrogram spec = vaemm::stft(noisy, params);

  const vaemm::ModelBundle bundle = vaemm::load_model(args.model);

  vaemm::VisualEmbeddings embeddings(0, 0);
  if (mode != vaemm::Mode::kAudioOnly)
    embeddings = vaemm::align_embeddings(vaemm::load_embeddings(args.visual), spec.values.cols());

  vaemm::VemConfig config;
  config.n_vem_iters = args.iters;
  config.mh.n_iters = args.mh_iters;
  config.mh.burn_in = args.mh_burnin;
  config.mh.epsilon = args.epsilon;
  config.nmf_rank = args.nmf_rank;
  config.seed = args.seed;
  config.mode = mode;
  config.threads = args.threads;
  if (args.stop_rel_q > 0) config.stop_rel_q = args.stop_rel_q;

  const vaemm::VemResult result = vaemm::run(spec.values, embeddings, bundle, config);

  vaemm::Spectrogram enhanced = spec;
  enhanced.values = result.enhanced;
  vaemm::write_wav(args.output, vaemm::istft(enhanced));

  const std::string trace_dir = args.trace_dir.empty()
                                    ? std::filesystem::path(args.output).parent_path().string()
                                    : args.trace_dir;
  std::error_code ec;
  if (!trace_dir.empty()) std::filesystem::create_directories(trace_dir, ec);
  const std::string prefix = trace_dir.empty() ? "" : trace_dir + "/";
  vaemm::write_diagnostics_csv(prefix + "diagnostics.csv", result.trace);
  vaemm::write_frames_csv(prefix + "frames.csv", result.pi_frames);

  vaemm::RunManifest manifest;
  manifest.created_utc = vaemm::utc_now();
  manifest.input_path = args.input;
  manifest.visual_path = args.visual;
  manifest.model_path = args.model;
  manifest.output_path = args.output;
  manifest.trace_dir = trace_dir;
  manifest.config = config;
  manifest.stft = params;
  manifest.sample_rate = noisy.sample_rate;
  vaemm::save_manifest(prefix + "manifest.json", manifest);

  std::printf("enhanced %s -> %s (%d iterations, %lld frames, final pi %.4f)\n",
              args.input.c_str(), args.output.c_str(), result.iterations,
              static_cast<long long>(result.pi_frames.size()),
              result.trace.empty() ? 0.0 : result.trace.back().pi);
  return kExitOk;
}

struct SynthArgs {
  std::string out;
  std::string window = "sqrt_hann";
  int frames = 300;
  int fft_size = 30;
  int hop = 15;
  int latent_dim = 2;
  int visual_dim = 2;
  int hidden_dim = 16;
  int noise_rank = 2;
  double noise_scale = 1.0;
  double pi_true = 0.0;
  double corrupt_fraction = 1.0 / 3.0;
  int block_len = 20;
  bool no_corrupt = false;
  bool with_encoders = false;
  std::uint64_t seed = 0;
  int sample_rate = 16000;
};

int cmd_synth(const SynthArgs& args) {
  vaemm::StftParams params;
  params.fft_size = args.fft_size;
  params.hop = args.hop;
  params.window = vaemm::window_from_string(args.window);
  vaemm::validate_params(params);

  const Eigen::Index f_dim = vaemm::num_bins(params);
  const vaemm::ModelBundle bundle =
      vaemm::make_toy_bundle(args.latent_dim, args.visual_dim, f_dim, args.seed, args.hidden_dim,
                             args.with_encoders);

  vaemm::Rng nmf_rng(vaemm::derive_seed(args.seed, 0x6e6f697365ULL));
  vaemm::NmfParams noise = vaemm::random_nmf(f_dim, args.noise_rank, args.frames, nmf_rng);
  vaemm::require(args.noise_scale > 0, "synth: noise scale must be positive");
  noise.w *= args.noise_scale;

  vaemm::SyntheticScene scene = vaemm::generate_scene(bundle, noise, args.pi_true, args.frames,
                                                      args.seed, params, args.sample_rate);
  if (!args.no_corrupt) {
    auto [corrupted, mask] =
        vaemm::corrupt_visuals(scene.embeddings, args.corrupt_fraction, args.block_len, args.seed);
    scene.embeddings_corrupted = std::move(corrupted);
    scene.corruption_mask = std::move(mask);
  }
  vaemm::save_scene(args.out, scene);
  std::printf("scene written to %s (%d frames, %lld bins, %lld corrupted)\n", args.out.c_str(),
              args.frames, static_cast<long long>(f_dim),
              static_cast<long long>(scene.corruption_mask.sum()));
  return kExitOk;
}

struct EvalArgs {
  std::string reference, noisy, enhanced, output;
};

int cmd_eval(const EvalArgs& args) {
  const vaemm::AudioSignal reference = vaemm::read_wav(args.reference);
  const vaemm::AudioSignal noisy = vaemm::read_wav(args.noisy);
  const vaemm::AudioSignal enhanced = vaemm::read_wav(args.enhanced);

  const auto max_len =
      std::max({reference.samples.size(), noisy.samples.size(), enhanced.samples.size()});
  const auto min_len =
      std::min({reference.samples.size(), noisy.samples.size(), enhanced.samples.size()});
  if (static_cast<double>(max_len - min_len) > 0.1 * static_cast<double>(max_len))
    throw vaemm::ValidationError("eval: signal lengths differ by more than 10%");

  const vaemm::SdrReport report = vaemm::make_sdr_report(reference, noisy, enhanced);

  std::ofstream out(args.output);
  if (!out) throw vaemm::IoError("cannot open report for writing: " + args.output);
  char buf[160];
  std::snprintf(buf, sizeof(buf), "sdr_in_db,sdr_out_db,delta_db\n%.17g,%.17g,%.17g\n",
                report.sdr_in_db, report.sdr_out_db, report.delta_db);
  out << buf;

  std::printf("SDR in: %.2f dB\nSDR out: %.2f dB\ndelta: %.2f dB\n", report.sdr_in_db,
              report.sdr_out_db, report.delta_db);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"VAE mixture-model speech enhancement"};
  app.require_subcommand(1);

  EnhanceArgs enhance_args;
  CLI::App* enhance = app.add_subcommand("enhance", "Enhance a noisy mono WAV");
  enhance->add_option("--input", enhance_args.input, "noisy input WAV")->required();
  enhance->add_option("--visual", enhance_args.visual, "visual embeddings (.csv or binary)");
  enhance->add_option("--model", enhance_args.model, "model bundle (.vaemm.json)")->required();
  enhance->add_option("--output", enhance_args.output, "enhanced output WAV")->required();
  enhance->add_option("--mode", enhance_args.mode, "a | av | mix");
  enhance->add_option("--trace-dir", enhance_args.trace_dir, "directory for CSV traces/manifest");
  enhance->add_option("--iters", enhance_args.iters, "variational EM iterations");
  enhance->add_option("--mh-iters", enhance_args.mh_iters, "MH iterations per frame per EM step");
  enhance->add_option("--mh-burnin", enhance_args.mh_burnin, "MH burn-in samples discarded");
  enhance->add_option("--epsilon", enhance_args.epsilon, "MH proposal variance");
  enhance->add_option("--nmf-rank", enhance_args.nmf_rank, "noise model rank");
  enhance->add_option("--seed", enhance_args.seed, "random seed");
  enhance->add_option("--threads", enhance_args.threads, "worker threads");
  enhance->add_option("--fft-size", enhance_args.fft_size, "STFT size in samples");
  enhance->add_option("--hop", enhance_args.hop, "STFT hop in samples");
  enhance->add_option("--window", enhance_args.window, "sqrt_hann | hann | rect");
  enhance->add_option("--stop-rel-q", enhance_args.stop_rel_q,
                      "early stop on relative objective change (0 = off)");

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic scene directory");
  synth->add_option("--out", synth_args.out, "output directory")->required();
  synth->add_option("--frames", synth_args.frames, "number of STFT frames");
  synth->add_option("--fft-size", synth_args.fft_size, "STFT size in samples");
  synth->add_option("--hop", synth_args.hop, "STFT hop in samples");
  synth->add_option("--window", synth_args.window, "sqrt_hann | hann | rect");
  synth->add_option("--latent-dim", synth_args.latent_dim, "latent dimension");
  synth->add_option("--visual-dim", synth_args.visual_dim, "embedding dimension");
  synth->add_option("--hidden-dim", synth_args.hidden_dim, "toy network hidden width");
  synth->add_option("--noise-rank", synth_args.noise_rank, "true NMF rank");
  synth->add_option("--noise-scale", synth_args.noise_scale, "noise variance scale");
  synth->add_option("--pi-true", synth_args.pi_true, "true audio-only branch probability");
  synth->add_option("--corrupt-fraction", synth_args.corrupt_fraction,
                    "fraction of frames to corrupt");
  synth->add_option("--block-len", synth_args.block_len, "corruption block length");
  synth->add_flag("--no-corrupt", synth_args.no_corrupt, "skip embedding corruption");
  synth->add_flag("--with-encoders", synth_args.with_encoders, "ship toy encoders too");
  synth->add_option("--seed", synth_args.seed, "random seed");
  synth->add_option("--sample-rate", synth_args.sample_rate, "WAV sample rate");

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "Score an enhanced WAV against a reference");
  eval->add_option("--reference", eval_args.reference, "clean reference WAV")->required();
  eval->add_option("--noisy", eval_args.noisy, "noisy mixture WAV")->required();
  eval->add_option("--enhanced", eval_args.enhanced, "enhanced WAV")->required();
  eval->add_option("--output", eval_args.output, "report CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (app.got_subcommand(enhance)) return cmd_enhance(enhance_args);
    if (app.got_subcommand(synth)) return cmd_synth(synth_args);
    if (app.got_subcommand(eval)) return cmd_eval(eval_args);
  } catch (const vaemm::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const vaemm::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const vaemm::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}
