#ifndef CIRCLELAB_MODEL_IO_HPP_
#define CIRCLELAB_MODEL_IO_HPP_

#include <string>

#include "circlelab/model.hpp"

namespace circlelab {

// Flat binary model format, fully little-endian:
//   bytes 0-7   magic "CLABMDL1"
//   u32         format version (currently 1)
//   u32         frame_dim
//   u32         number of hidden layers H
//   u32 x H     hidden layer widths
//   u32         embedding_dim
//   u32         num_classes
//   u32         activation (0 = tanh, 1 = identity)
//   f64 x N     weights, row-major: hidden layers in order, then the
//               embedding projection, then the classifier
// Loading validates magic, version, dimensions and exact payload size and
// throws IoError on any mismatch. A save/load/save round trip is
// byte-identical.

void save_model(const std::string& path, const ToyModel& model);
ToyModel load_model(const std::string& path);

}  // namespace circlelab

#endif  // CIRCLELAB_MODEL_IO_HPP_
