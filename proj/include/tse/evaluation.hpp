// Copyright 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "tse/dataset.hpp"
#include "tse/objectives.hpp"
#include "tse/trainer.hpp"
#include "tse/wav.hpp"

namespace tse {

/// Plain energy-ratio SDR: 10 log10(||s||^2 / (||s - s_hat||^2 + eps)),
/// capped at 80 dB. This is not the BSS-Eval SDR.
inline double sdr(const Waveform& target, const Waveform& estimate) {
  TSE_REQUIRE(target.size() == estimate.size(), "sdr: length mismatch ", target.size(), " vs ",
              estimate.size());
  double signal = 0.0, error = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    signal += target.samples[i] * target.samples[i];
    const double d = target.samples[i] - estimate.samples[i];
    error += d * d;
  }
  TSE_REQUIRE(signal > 0.0, "sdr: target has zero energy");
  return std::min(kSnrCapDb, 10.0 * std::log10(signal / (error + kSnrEps)));
}

using Metric = std::function<double(const Waveform&, const Waveform&)>;

inline double si_snr_metric(const Waveform& s, const Waveform& e) { return si_snr(s, e); }
inline double sdr_metric(const Waveform& s, const Waveform& e) { return sdr(s, e); }

/// metric(s, s_hat) - metric(s, i)
inline double improvement(const Metric& metric, const Waveform& target, const Waveform& estimate,
                          const Waveform& mixture) {
  TSE_REQUIRE(target.size() == estimate.size() && target.size() == mixture.size(),
              "improvement: signals must have equal length");
  TSE_REQUIRE(target.sample_rate == estimate.sample_rate && target.sample_rate == mixture.sample_rate,
              "improvement: signals must share a sample rate");
  return metric(target, estimate) - metric(target, mixture);
}

struct EvalRow {
  std::string id;
  double si_snr_in = 0, si_snr_out = 0, si_snri = 0;
  double sdr_in = 0, sdr_out = 0, sdri = 0;
};

inline EvalRow score_example(const std::string& id, const Waveform& target, const Waveform& estimate,
                             const Waveform& mixture) {
  EvalRow r;
  r.id = id;
  r.si_snr_in = si_snr(target, mixture);
  r.si_snr_out = si_snr(target, estimate);
  r.si_snri = r.si_snr_out - r.si_snr_in;
  r.sdr_in = sdr(target, mixture);
  r.sdr_out = sdr(target, estimate);
  r.sdri = r.sdr_out - r.sdr_in;
  return r;
}

struct EvalReport {
  std::vector<EvalRow> rows;
  EvalRow mean;  // id "mean"
  std::vector<std::string> failures;
  nlohmann::json config;

  /// Sorts rows by id and recomputes the arithmetic means.
  void finalize() {
    std::sort(rows.begin(), rows.end(), [](const EvalRow& a, const EvalRow& b) { return a.id < b.id; });
    mean = EvalRow{};
    mean.id = "mean";
    if (rows.empty()) return;
    for (const auto& r : rows) {
      mean.si_snr_in += r.si_snr_in;
      mean.si_snr_out += r.si_snr_out;
      mean.si_snri += r.si_snri;
      mean.sdr_in += r.sdr_in;
      mean.sdr_out += r.sdr_out;
      mean.sdri += r.sdri;
    }
    const double n = static_cast<double>(rows.size());
    mean.si_snr_in /= n;
    mean.si_snr_out /= n;
    mean.si_snri /= n;
    mean.sdr_in /= n;
    mean.sdr_out /= n;
    mean.sdri /= n;
  }
};

inline nlohmann::json row_to_json(const EvalRow& r) {
  return {{"id", r.id},         {"si_snr_in", r.si_snr_in}, {"si_snr_out", r.si_snr_out},
          {"si_snri", r.si_snri}, {"sdr_in", r.sdr_in},       {"sdr_out", r.sdr_out},
          {"sdri", r.sdri}};
}

inline EvalRow row_from_json(const nlohmann::json& j) {
  EvalRow r;
  r.id = j.at("id").get<std::string>();
  r.si_snr_in = j.at("si_snr_in").get<double>();
  r.si_snr_out = j.at("si_snr_out").get<double>();
  r.si_snri = j.at("si_snri").get<double>();
  r.sdr_in = j.at("sdr_in").get<double>();
  r.sdr_out = j.at("sdr_out").get<double>();
  r.sdri = j.at("sdri").get<double>();
  return r;
}

/// Report file schema (JSON):
///   { "schema": "tse-eval-report/1",
///     "sdr_definition": "...",
///     "rows": [ {id, si_snr_in, si_snr_out, si_snri, sdr_in, sdr_out, sdri}, ... ],
///     "aggregate": { n, si_snr_in, si_snr_out, si_snri, sdr_in, sdr_out, sdri },
///     "failures": [ "<file>: <reason>", ... ],
///     "config": { training config snapshot } }
inline nlohmann::json report_to_json(const EvalReport& rep) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : rep.rows) rows.push_back(row_to_json(r));
  auto agg = row_to_json(rep.mean);
  agg.erase("id");
  agg["n"] = rep.rows.size();
  return {{"schema", "tse-eval-report/1"},
          {"sdr_definition", "10*log10(|s|^2 / (|s - s_hat|^2 + 1e-8)), capped at 80 dB; not BSS-Eval"},
          {"rows", rows},
          {"aggregate", agg},
          {"failures", rep.failures},
          {"config", rep.config}};
}

inline EvalReport report_from_json(const nlohmann::json& j) {
  if (j.value("schema", "") != "tse-eval-report/1") throw IoError("not a tse evaluation report");
  EvalReport rep;
  try {
    for (const auto& r : j.at("rows")) rep.rows.push_back(row_from_json(r));
    rep.failures = j.value("failures", std::vector<std::string>{});
    rep.config = j.value("config", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed report: ") + e.what());
  }
  rep.finalize();
  return rep;
}

inline std::string render_table(const EvalReport& rep) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-24s %10s %10s %10s %10s %10s %10s\n", "id", "SI-SNR in", "SI-SNR out",
                "SI-SNRi", "SDR in", "SDR out", "SDRi");
  os << line;
  auto emit = [&](const EvalRow& r) {
    std::snprintf(line, sizeof line, "%-24s %10.3f %10.3f %10.3f %10.3f %10.3f %10.3f\n", r.id.c_str(),
                  r.si_snr_in, r.si_snr_out, r.si_snri, r.sdr_in, r.sdr_out, r.sdr_out - r.sdr_in);
    os << line;
  };
  for (const auto& r : rep.rows) emit(r);
  os << std::string(24 + 6 * 11, '-') << "\n";
  emit(rep.mean);
  os << rep.rows.size() << " example(s)";
  if (!rep.failures.empty()) os << ", " << rep.failures.size() << " failed";
  os << "\nSDR is the plain energy-ratio SNR, not BSS-Eval.\n";
  for (const auto& f : rep.failures) os << "failed: " << f << "\n";
  return os.str();
}

/// Runs the model over every record of `manifest`. Records whose files
/// cannot be read are listed in `failures` and skipped.
inline EvalReport evaluate(Trainer& model, const Manifest& manifest) {
  EvalReport rep;
  rep.config = config_to_json(model.config());
  for (const auto& rec : manifest.records) {
    MixtureExample ex;
    try {
      ex = load_example(manifest, rec);
    } catch (const std::exception& e) {
      rep.failures.push_back(e.what());
      continue;
    }
    const Waveform est = model.extract(ex.mixture, ex.reference);
    rep.rows.push_back(score_example(ex.id, ex.target, est, ex.mixture));
  }
  rep.finalize();
  return rep;
}

inline EvalReport evaluate(const fs::path& manifest_path, const fs::path& checkpoint) {
  auto model = Trainer::load(checkpoint);
  return evaluate(*model, read_manifest(manifest_path));
}

inline void write_report(const fs::path& path, const EvalReport& rep) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out << report_to_json(rep).dump(2) << "\n";
}

inline EvalReport read_report(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string() + ": cannot open report");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  return report_from_json(j);
}

/// Extracts the target speaker from `mixture_wav` and writes a 16-bit
/// 8 kHz WAV with the mixture's duration.
inline Waveform extract_file(Trainer& model, const fs::path& mixture_wav, const fs::path& reference_wav,
                             const fs::path& out_wav) {
  const Waveform mix = wav::read(mixture_wav);
  const Waveform ref = wav::read(reference_wav);
  // 16 kHz mixtures are resampled inside extract(); the output is always
  // 8 kHz with the same duration.
  Waveform est = model.extract(mix, ref);
  wav::write(out_wav, est);
  return est;
}

}  // namespace tse
