#include "circlelab/corpus.hpp"

#include <array>
#include <cmath>
#include <cstdio>

#include "circlelab/errors.hpp"
#include "circlelab/matrix.hpp"

namespace circlelab {

namespace {

// Stream tags for deriving independent RNG streams from the corpus seed.
constexpr std::uint64_t kTagMeans = 0x636f7270'0001ull;
constexpr std::uint64_t kTagFrames = 0x636f7270'0002ull;
constexpr std::uint64_t kTagLabels = 0x636f7270'0003ull;

}  // namespace

void SyntheticCorpusSpec::validate() const {
  if (num_speakers < 2) throw ConfigError("corpus needs at least 2 speakers");
  if (utterances_per_speaker < 1) throw ConfigError("need at least 1 utterance per speaker");
  if (frame_dim < 2) throw ConfigError("frame_dim must be >= 2");
  if (max_frames < 1) throw ConfigError("max_frames must be >= 1");
  if (!(within_speaker_noise >= 0.0)) throw ConfigError("within_speaker_noise must be >= 0");
  if (!(label_noise_rate >= 0.0 && label_noise_rate < 1.0))
    throw ConfigError("label_noise_rate must be in [0, 1)");
}

Corpus generate_corpus(const SyntheticCorpusSpec& spec) {
  spec.validate();
  Corpus corpus;
  corpus.frame_dim = spec.frame_dim;
  corpus.num_speakers = spec.num_speakers;
  corpus.utterances_per_speaker = spec.utterances_per_speaker;

  // Unit-norm speaker mean directions, uniform on the sphere.
  Rng mean_rng(mix_seed(spec.seed, kTagMeans));
  std::vector<std::vector<double>> means(static_cast<std::size_t>(spec.num_speakers));
  for (auto& mean : means) {
    mean.resize(static_cast<std::size_t>(spec.frame_dim));
    double nrm2 = 0.0;
    do {
      for (auto& v : mean) v = mean_rng.normal();
      nrm2 = norm2(mean);
    } while (nrm2 < 1e-24);  // astronomically unlikely, but keeps norm well-defined
    const double inv = 1.0 / std::sqrt(nrm2);
    for (auto& v : mean) v *= inv;
  }

  Rng frame_rng(mix_seed(spec.seed, kTagFrames));
  corpus.utterances.reserve(
      static_cast<std::size_t>(spec.num_speakers) * spec.utterances_per_speaker);
  for (int spk = 0; spk < spec.num_speakers; ++spk) {
    for (int u = 0; u < spec.utterances_per_speaker; ++u) {
      Utterance utt;
      utt.speaker = spk;
      utt.label = spk;
      utt.frames.resize(static_cast<std::size_t>(spec.max_frames) * spec.frame_dim);
      for (int t = 0; t < spec.max_frames; ++t) {
        for (int d = 0; d < spec.frame_dim; ++d) {
          utt.frames[static_cast<std::size_t>(t) * spec.frame_dim + d] =
              means[static_cast<std::size_t>(spk)][static_cast<std::size_t>(d)] +
              spec.within_speaker_noise * frame_rng.normal();
        }
      }
      corpus.utterances.push_back(std::move(utt));
    }
  }

  // Relabel exactly floor(rate * N) utterances, chosen without replacement,
  // each to a uniformly drawn other speaker.
  const int total = corpus.num_utterances();
  const int num_noisy = static_cast<int>(spec.label_noise_rate * total);
  if (num_noisy > 0) {
    Rng label_rng(mix_seed(spec.seed, kTagLabels));
    std::vector<int> order(static_cast<std::size_t>(total));
    for (int i = 0; i < total; ++i) order[static_cast<std::size_t>(i)] = i;
    label_rng.shuffle(order);
    for (int k = 0; k < num_noisy; ++k) {
      Utterance& utt = corpus.utterances[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])];
      int other = static_cast<int>(label_rng.uniform_int(0, spec.num_speakers - 2));
      if (other >= utt.label) ++other;
      utt.label = other;
    }
  }
  return corpus;
}

std::string utterance_id(const Corpus& corpus, int utt_index) {
  if (utt_index < 0 || utt_index >= corpus.num_utterances())
    throw DomainError("utterance index out of range");
  const int spk = utt_index / corpus.utterances_per_speaker;
  const int u = utt_index % corpus.utterances_per_speaker;
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "spk%04d_utt%03d", spk, u);
  return std::string(buf.data());
}

int utterance_index(const Corpus& corpus, const std::string& id) {
  int spk = 0, u = 0;
  if (std::sscanf(id.c_str(), "spk%4d_utt%3d", &spk, &u) != 2 ||
      spk < 0 || spk >= corpus.num_speakers || u < 0 ||
      u >= corpus.utterances_per_speaker)
    throw ConfigError("unknown utterance id '" + id + "'");
  return spk * corpus.utterances_per_speaker + u;
}

std::vector<double> sample_chunk(const Utterance& utt, int frame_dim, int width,
                                 Rng& rng) {
  const int num_frames = static_cast<int>(utt.frames.size()) / frame_dim;
  if (num_frames < 1) throw DomainError("cannot chunk an empty utterance");
  if (width < 1) throw DomainError("chunk width must be >= 1");

  // Cyclic extension to the smallest multiple of the utterance length that
  // covers the chunk, then a uniform crop. When width <= num_frames this is
  // exactly a uniform contiguous crop of the original frames.
  const int cycles = (width + num_frames - 1) / num_frames;
  const int ext_len = cycles * num_frames;
  const int offset = static_cast<int>(rng.uniform_int(0, ext_len - width));

  std::vector<double> chunk(static_cast<std::size_t>(width) * frame_dim);
  for (int t = 0; t < width; ++t) {
    const int src = (offset + t) % num_frames;
    for (int d = 0; d < frame_dim; ++d) {
      chunk[static_cast<std::size_t>(t) * frame_dim + d] =
          utt.frames[static_cast<std::size_t>(src) * frame_dim + d];
    }
  }
  return chunk;
}

int sample_chunk_width(int l1, int l2, Rng& rng) {
  if (l1 > l2) throw ConfigError("chunk interval needs l1 <= l2");
  if (l1 < 1) throw ConfigError("chunk width lower bound must be >= 1");
  return static_cast<int>(rng.uniform_int(l1, l2));
}

}  // namespace circlelab
