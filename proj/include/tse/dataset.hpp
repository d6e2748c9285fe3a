// Copyright 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tse/core.hpp"
#include "tse/resample.hpp"
#include "tse/wav.hpp"

namespace tse {

namespace fs = std::filesystem;

/// Thrown by build_example when an utterance cannot supply the required
/// segments; callers skip the draw and log the reason.
class SkipExample : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MixConfig {
  double mixture_seconds = 3.0;
  double reference_seconds = 2.0;
  double gain_db_min = -5.0;
  double gain_db_max = 5.0;
  double clip_peak = 0.9;
};

struct MixResult {
  Waveform mixture;
  /// Scalar applied to the mixture (1 unless it would clip); the caller
  /// applies the same scalar to the stored target.
  double scale = 1.0;
};

/// out = a + 10^(gain_db/20) * b over the shorter length, rescaled to
/// `clip_peak` if any sample would exceed 1 in magnitude.
inline MixResult mix_pair(const Waveform& a, const Waveform& b, double gain_db,
                          double clip_peak = 0.9) {
  TSE_REQUIRE(a.sample_rate == b.sample_rate, "sample-rate mismatch: ", a.sample_rate,
              " vs ", b.sample_rate);
  const std::size_t n = std::min(a.size(), b.size());
  const double g = std::pow(10.0, gain_db / 20.0);
  MixResult r;
  r.mixture.sample_rate = a.sample_rate;
  r.mixture.samples.resize(n);
  for (std::size_t k = 0; k < n; ++k) r.mixture.samples[k] = a.samples[k] + g * b.samples[k];
  const double p = peak(r.mixture.samples);
  if (p > 1.0) {
    r.scale = clip_peak / p;
    for (double& v : r.mixture.samples) v *= r.scale;
  }
  return r;
}

struct MixtureExample {
  Waveform mixture;    // 8 kHz
  Waveform target;     // 8 kHz, same length as mixture
  Waveform reference;  // 16 kHz
  std::string target_speaker_id;
  std::string interferer_speaker_id;
  double gain_db = 0.0;
  /// Source-rate sample ranges [begin, end) inside the target utterance.
  std::pair<std::size_t, std::size_t> target_region{0, 0};
  std::pair<std::size_t, std::size_t> reference_region{0, 0};
  std::string id;

  bool operator==(const MixtureExample&) const = default;
};

struct Utterance {
  Waveform audio;
  std::string speaker_id;
};

inline Waveform slice(const Waveform& w, std::size_t begin, std::size_t len) {
  return Waveform(std::vector<double>(w.samples.begin() + static_cast<std::ptrdiff_t>(begin),
                                      w.samples.begin() + static_cast<std::ptrdiff_t>(begin + len)),
                  w.sample_rate);
}

/// Cuts a 3 s target segment and a disjoint 2 s reference segment from
/// `target`, a 3 s interferer segment from `interferer`, and mixes the
/// two at a gain drawn uniformly from the configured dB range.
inline MixtureExample build_example(const Utterance& target, const Utterance& interferer,
                                    uint64_t seed, const MixConfig& cfg = {}) {
  TSE_REQUIRE(target.speaker_id != interferer.speaker_id,
              "target and interferer must be different speakers");
  TSE_REQUIRE(target.audio.sample_rate == interferer.audio.sample_rate,
              "utterances must share a sample rate");
  const int sr = target.audio.sample_rate;
  const auto seg = static_cast<std::size_t>(std::llround(cfg.mixture_seconds * sr));
  const auto ref = static_cast<std::size_t>(std::llround(cfg.reference_seconds * sr));
  const std::size_t len = target.audio.size();
  if (len < seg + ref) {
    throw SkipExample(detail::concat("target utterance too short: ", len / double(sr),
                                     " s < ", cfg.mixture_seconds + cfg.reference_seconds, " s"));
  }
  if (interferer.audio.size() < seg) {
    throw SkipExample(detail::concat("interferer utterance too short: ",
                                     interferer.audio.size() / double(sr), " s < ",
                                     cfg.mixture_seconds, " s"));
  }

  Rng rng(seed);
  // Layout: [lead][first][gap][second][tail] with slack = lead+gap+tail.
  const std::size_t slack = len - seg - ref;
  const bool target_first = rng.below(2) == 0;
  const std::size_t lead = rng.below(slack + 1);
  const std::size_t gap = rng.below(slack - lead + 1);
  std::size_t tgt_begin, ref_begin;
  if (target_first) {
    tgt_begin = lead;
    ref_begin = lead + seg + gap;
  } else {
    ref_begin = lead;
    tgt_begin = lead + ref + gap;
  }
  const std::size_t int_begin = rng.below(interferer.audio.size() - seg + 1);
  const double gain = rng.uniform(cfg.gain_db_min, cfg.gain_db_max);

  MixtureExample ex;
  ex.target_speaker_id = target.speaker_id;
  ex.interferer_speaker_id = interferer.speaker_id;
  ex.gain_db = gain;
  ex.target_region = {tgt_begin, tgt_begin + seg};
  ex.reference_region = {ref_begin, ref_begin + ref};

  Waveform tgt = resample(slice(target.audio, tgt_begin, seg), kSeparatorRate);
  Waveform itf = resample(slice(interferer.audio, int_begin, seg), kSeparatorRate);
  auto mixed = mix_pair(tgt, itf, gain, cfg.clip_peak);
  for (double& v : tgt.samples) v *= mixed.scale;
  tgt.samples.resize(mixed.mixture.size());
  ex.mixture = std::move(mixed.mixture);
  ex.target = std::move(tgt);
  ex.reference = resample(slice(target.audio, ref_begin, ref), kEncoderRate);
  return ex;
}

// ---------------------------------------------------------------------------
// Manifest

struct ManifestRecord {
  std::string mixture_path;
  std::string target_path;
  std::string reference_path;
  std::string target_id;
  std::string interferer_id;
  double gain_db = 0.0;

  bool operator==(const ManifestRecord&) const = default;
};

struct Manifest {
  std::vector<ManifestRecord> records;
  /// Directory that relative paths are resolved against.
  fs::path base_dir;

  fs::path resolve(const std::string& p) const {
    fs::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  }
};

inline std::string format_gain(double g) {
  std::ostringstream os;
  os << std::setprecision(17) << g;
  return os.str();
}

inline std::string serialize_manifest(const Manifest& m) {
  std::ostringstream os;
  for (const auto& r : m.records) {
    os << r.mixture_path << '\t' << r.target_path << '\t' << r.reference_path << '\t'
       << r.target_id << '\t' << r.interferer_id << '\t' << format_gain(r.gain_db) << '\n';
  }
  return os.str();
}

inline Manifest parse_manifest(const std::string& text, const fs::path& base_dir,
                               const std::string& name = "manifest") {
  Manifest m;
  m.base_dir = base_dir;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 6) {
      throw IoError(detail::concat(name, ":", lineno, ": expected 6 tab-separated fields, got ",
                                   fields.size()));
    }
    ManifestRecord r{fields[0], fields[1], fields[2], fields[3], fields[4], 0.0};
    try {
      r.gain_db = std::stod(fields[5]);
    } catch (const std::exception&) {
      throw IoError(detail::concat(name, ":", lineno, ": bad gain_db '", fields[5], "'"));
    }
    m.records.push_back(std::move(r));
  }
  return m;
}

inline Manifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string() + ": cannot open manifest");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str(), fs::absolute(path).parent_path(), path.string());
}

inline void write_manifest(const fs::path& path, const Manifest& m) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw IoError(tmp.string() + ": cannot open for writing");
    out << serialize_manifest(m);
  }
  fs::rename(tmp, path);
}

inline std::string record_id(const ManifestRecord& r) {
  return fs::path(r.mixture_path).stem().string();
}

/// Loads the WAV triple a record points to. Throws IoError naming the file.
inline MixtureExample load_example(const Manifest& m, const ManifestRecord& r) {
  MixtureExample ex;
  ex.mixture = wav::read(m.resolve(r.mixture_path));
  ex.target = wav::read(m.resolve(r.target_path));
  ex.reference = wav::read(m.resolve(r.reference_path));
  ex.target_speaker_id = r.target_id;
  ex.interferer_speaker_id = r.interferer_id;
  ex.gain_db = r.gain_db;
  ex.id = record_id(r);
  if (ex.mixture.sample_rate != kSeparatorRate) ex.mixture = resample(ex.mixture, kSeparatorRate);
  if (ex.target.sample_rate != kSeparatorRate) ex.target = resample(ex.target, kSeparatorRate);
  if (ex.reference.sample_rate != kEncoderRate) ex.reference = resample(ex.reference, kEncoderRate);
  TSE_REQUIRE(ex.mixture.size() == ex.target.size(), ex.id,
              ": mixture and target lengths differ");
  return ex;
}

inline std::vector<MixtureExample> load_examples(const Manifest& m) {
  if (m.records.empty()) throw InvalidInput("manifest has no records");
  std::vector<MixtureExample> out;
  out.reserve(m.records.size());
  for (const auto& r : m.records) out.push_back(load_example(m, r));
  return out;
}

// ---------------------------------------------------------------------------
// Corpus scanning and dataset synthesis

/// Speaker id -> sorted list of WAV paths. Speaker ids are the names of the
/// immediate subdirectories of `corpus_dir`.
using Corpus = std::map<std::string, std::vector<fs::path>>;

inline Corpus scan_corpus(const fs::path& corpus_dir) {
  if (!fs::is_directory(corpus_dir)) throw IoError(corpus_dir.string() + ": not a directory");
  Corpus corpus;
  for (const auto& spk : fs::directory_iterator(corpus_dir)) {
    if (!spk.is_directory()) continue;
    std::vector<fs::path> files;
    for (const auto& f : fs::recursive_directory_iterator(spk.path())) {
      if (f.is_regular_file() && f.path().extension() == ".wav") files.push_back(f.path());
    }
    std::sort(files.begin(), files.end());
    if (!files.empty()) corpus[spk.path().filename().string()] = std::move(files);
  }
  return corpus;
}

struct SynthOptions {
  std::size_t n_examples = 0;
  uint64_t seed = 0;
  MixConfig mix;
  /// Draw attempts per example before giving up on it.
  int max_attempts = 32;
  std::ostream* log = nullptr;
};

/// Builds `n_examples` mixtures from a per-speaker corpus and writes
/// `<out_dir>/wav/<id>_{mix,tgt,ref}.wav` plus `<out_dir>/manifest.tsv`.
/// Example k only depends on (seed, k).
inline Manifest synth_dataset(const fs::path& corpus_dir, const fs::path& out_dir,
                              const SynthOptions& opts) {
  const Corpus corpus = scan_corpus(corpus_dir);
  if (corpus.size() < 2) {
    throw InvalidInput(detail::concat(corpus_dir.string(), ": need at least 2 speakers, found ",
                                      corpus.size()));
  }
  std::vector<std::string> speakers;
  for (const auto& [id, _] : corpus) speakers.push_back(id);

  fs::create_directories(out_dir / "wav");
  Manifest manifest;
  manifest.base_dir = fs::absolute(out_dir);

  std::map<fs::path, Waveform> cache;
  auto load = [&](const fs::path& p) -> const Waveform& {
    auto it = cache.find(p);
    if (it == cache.end()) it = cache.emplace(p, wav::read(p)).first;
    return it->second;
  };

  for (std::size_t k = 0; k < opts.n_examples; ++k) {
    Rng rng(derive_seed(opts.seed, k));
    std::optional<MixtureExample> ex;
    for (int attempt = 0; attempt < opts.max_attempts && !ex; ++attempt) {
      const std::size_t ti = rng.below(speakers.size());
      std::size_t ii = rng.below(speakers.size() - 1);
      if (ii >= ti) ++ii;
      const auto& tfiles = corpus.at(speakers[ti]);
      const auto& ifiles = corpus.at(speakers[ii]);
      const auto& tpath = tfiles[rng.below(tfiles.size())];
      const auto& ipath = ifiles[rng.below(ifiles.size())];
      try {
        Utterance t{load(tpath), speakers[ti]};
        Utterance i{load(ipath), speakers[ii]};
        ex = build_example(t, i, rng.next(), opts.mix);
      } catch (const SkipExample& e) {
        if (opts.log) *opts.log << "skip example " << k << " (" << tpath.filename().string()
                                << ", " << ipath.filename().string() << "): " << e.what() << "\n";
      }
    }
    if (!ex) {
      throw InvalidInput(detail::concat("example ", k, ": no usable utterance pair after ",
                                        opts.max_attempts, " attempts"));
    }
    std::ostringstream stem;
    stem << std::setw(6) << std::setfill('0') << k;
    const std::string mix_rel = "wav/" + stem.str() + "_mix.wav";
    const std::string tgt_rel = "wav/" + stem.str() + "_tgt.wav";
    const std::string ref_rel = "wav/" + stem.str() + "_ref.wav";
    wav::write(out_dir / mix_rel, ex->mixture);
    wav::write(out_dir / tgt_rel, ex->target);
    wav::write(out_dir / ref_rel, ex->reference);
    manifest.records.push_back({mix_rel, tgt_rel, ref_rel, ex->target_speaker_id,
                                ex->interferer_speaker_id, ex->gain_db});
  }
  write_manifest(out_dir / "manifest.tsv", manifest);
  return manifest;
}

}  // namespace tse
