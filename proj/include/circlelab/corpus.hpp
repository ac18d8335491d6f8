#ifndef CIRCLELAB_CORPUS_HPP_
#define CIRCLELAB_CORPUS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "circlelab/rng.hpp"

namespace circlelab {

// Generator parameters for a synthetic speaker corpus. Generation is a pure
// function of the spec: equal specs give bit-identical corpora.
struct SyntheticCorpusSpec {
  int num_speakers = 50;
  int utterances_per_speaker = 10;
  int frame_dim = 16;
  int max_frames = 40;            // frames per generated utterance
  double within_speaker_noise = 0.6;  // stddev of per-frame Gaussian noise
  double label_noise_rate = 0.05;     // fraction of utterances relabeled
  std::uint64_t seed = 1;

  void validate() const;  // ConfigError
};

struct Utterance {
  int speaker = 0;  // generating speaker (ground truth for verification)
  int label = 0;    // training label; differs from speaker when relabeled
  std::vector<double> frames;  // num_frames x frame_dim, row-major
};

struct Corpus {
  int frame_dim = 0;
  int num_speakers = 0;
  int utterances_per_speaker = 0;
  std::vector<Utterance> utterances;

  int num_utterances() const { return static_cast<int>(utterances.size()); }
  int num_frames(int utt_index) const {
    return static_cast<int>(utterances[static_cast<std::size_t>(utt_index)].frames.size()) /
           frame_dim;
  }
};

// Builds the corpus: one unit-norm mean direction per speaker (uniform on
// the sphere), utterances of max_frames i.i.d. frames (mean direction plus
// Gaussian noise), then exactly floor(label_noise_rate * N) utterances
// relabeled to a uniformly chosen other speaker. Utterances are ordered
// speaker-major, so corpora differing only in label_noise_rate share all
// frame data bit for bit.
Corpus generate_corpus(const SyntheticCorpusSpec& spec);

// Stable utterance identifier "spkSSSS_uttUUU" derived from the generation
// order; independent of label noise.
std::string utterance_id(const Corpus& corpus, int utt_index);

// Index of the utterance with the given id, or a ConfigError naming the id.
int utterance_index(const Corpus& corpus, const std::string& id);

// Chunk of exactly `width` frames from the utterance: a uniform random
// contiguous crop when the utterance is long enough, otherwise a cyclic
// extension followed by the crop. Throws DomainError for empty utterances
// or width < 1.
std::vector<double> sample_chunk(const Utterance& utt, int frame_dim, int width,
                                 Rng& rng);

// Uniform integer chunk width in [l1, l2]. Throws ConfigError when l1 > l2.
int sample_chunk_width(int l1, int l2, Rng& rng);

}  // namespace circlelab

#endif  // CIRCLELAB_CORPUS_HPP_
