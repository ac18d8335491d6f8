// Python bindings for the loss laboratory: losses and their gradients,
// margin schedules, the toy training harness, and verification metrics.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "circlelab/config.hpp"
#include "circlelab/corpus.hpp"
#include "circlelab/errors.hpp"
#include "circlelab/losses.hpp"
#include "circlelab/margin.hpp"
#include "circlelab/metrics.hpp"
#include "circlelab/model.hpp"
#include "circlelab/model_io.hpp"
#include "circlelab/train.hpp"

namespace py = pybind11;
using namespace circlelab;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Angular-margin loss laboratory";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  // ---- losses ----
  py::enum_<LossVariant>(m, "LossVariant")
      .value("SOFTMAX", LossVariant::kSoftmax)
      .value("ANGULAR_SOFTMAX", LossVariant::kAngularSoftmax)
      .value("CIRCLE_LOSS", LossVariant::kCircleLoss);

  py::class_<LossSpec>(m, "LossSpec")
      .def(py::init<>())
      .def_readwrite("variant", &LossSpec::variant)
      .def_readwrite("s", &LossSpec::s)
      .def_readwrite("m1", &LossSpec::m1)
      .def_readwrite("m2", &LossSpec::m2)
      .def_readwrite("m3", &LossSpec::m3)
      .def_readwrite("m", &LossSpec::m)
      .def("validate", &LossSpec::validate);

  py::class_<SimilarityState>(m, "SimilarityState")
      .def(py::init<>())
      .def(py::init([](double s_p, std::vector<double> s_n) {
             SimilarityState st;
             st.s_p = s_p;
             st.s_n = std::move(s_n);
             return st;
           }),
           py::arg("s_p"), py::arg("s_n"))
      .def_readwrite("s_p", &SimilarityState::s_p)
      .def_readwrite("s_n", &SimilarityState::s_n)
      .def("num_classes", &SimilarityState::num_classes);

  py::class_<GradPair>(m, "GradPair")
      .def_readonly("g_p", &GradPair::g_p)
      .def_readonly("g_n", &GradPair::g_n);

  py::class_<CircleInternals>(m, "CircleInternals")
      .def_readonly("alpha_p", &CircleInternals::alpha_p)
      .def_readonly("alpha_n", &CircleInternals::alpha_n)
      .def_readonly("o_p", &CircleInternals::o_p)
      .def_readonly("o_n", &CircleInternals::o_n)
      .def_readonly("delta_p", &CircleInternals::delta_p)
      .def_readonly("delta_n", &CircleInternals::delta_n);

  py::class_<LossAndGrad>(m, "LossAndGrad")
      .def_readonly("loss", &LossAndGrad::loss)
      .def_readonly("d_cos", &LossAndGrad::d_cos);

  m.def(
      "softmax_loss",
      [](const std::vector<double>& logits, int label) {
        return softmax_loss(logits, label);
      },
      py::arg("logits"), py::arg("label"));
  m.def(
      "angular_softmax_loss",
      [](double theta_p, const std::vector<double>& theta_n, const LossSpec& spec) {
        return angular_softmax_loss(theta_p, theta_n, spec);
      },
      py::arg("theta_p"), py::arg("theta_n"), py::arg("spec"));
  m.def("amsoftmax_toy_loss", &amsoftmax_toy_loss, py::arg("s_p"), py::arg("s_n"),
        py::arg("spec"), py::arg("num_classes"));
  m.def("amsoftmax_toy_grad", &amsoftmax_toy_grad, py::arg("s_p"), py::arg("s_n"),
        py::arg("spec"), py::arg("num_classes"));
  m.def("circle_loss", &circle_loss, py::arg("state"), py::arg("spec"));
  m.def("circle_loss_general", &circle_loss_general, py::arg("state"),
        py::arg("o_p"), py::arg("o_n"), py::arg("delta_p"), py::arg("delta_n"),
        py::arg("s"));
  m.def("circle_internals", &circle_internals, py::arg("state"), py::arg("o_p"),
        py::arg("o_n"), py::arg("delta_p"), py::arg("delta_n"));
  m.def("circle_toy_grad", &circle_toy_grad, py::arg("s_p"), py::arg("s_n"),
        py::arg("spec"), py::arg("num_classes"));
  m.def("toy_outside_typical_range", &toy_outside_typical_range, py::arg("s_p"),
        py::arg("s_n"));
  m.def(
      "classification_loss_grad",
      [](const std::vector<double>& cosines, int label, const LossSpec& spec) {
        return classification_loss_grad(cosines, label, spec);
      },
      py::arg("cosines"), py::arg("label"), py::arg("spec"));
  m.def(
      "log_sum_exp",
      [](const std::vector<double>& x) { return log_sum_exp(x); }, py::arg("x"));

  // ---- margin schedules ----
  py::class_<StageSchedule>(m, "StageSchedule")
      .def(py::init<>())
      .def(py::init([](std::vector<double> margins) {
             StageSchedule s;
             s.margins = std::move(margins);
             return s;
           }),
           py::arg("margins"))
      .def_readwrite("margins", &StageSchedule::margins)
      .def("num_stages", &StageSchedule::num_stages)
      .def("validate", &StageSchedule::validate);

  py::class_<ChunkMarginSpec>(m, "ChunkMarginSpec")
      .def(py::init<>())
      .def_readwrite("m0", &ChunkMarginSpec::m0)
      .def_readwrite("lam", &ChunkMarginSpec::lambda)
      .def_readwrite("l_min", &ChunkMarginSpec::l_min)
      .def_readwrite("l_max", &ChunkMarginSpec::l_max)
      .def("validate", &ChunkMarginSpec::validate);

  m.def("stage_margin", &stage_margin, py::arg("schedule"), py::arg("stage"));
  m.def("chunk_margin", &chunk_margin, py::arg("spec"), py::arg("chunk_width"));
  m.def("stage_for_epoch", &stage_for_epoch, py::arg("epoch"),
        py::arg("total_epochs"), py::arg("num_stages"));

  // ---- corpus and model ----
  py::class_<SyntheticCorpusSpec>(m, "SyntheticCorpusSpec")
      .def(py::init<>())
      .def_readwrite("num_speakers", &SyntheticCorpusSpec::num_speakers)
      .def_readwrite("utterances_per_speaker",
                     &SyntheticCorpusSpec::utterances_per_speaker)
      .def_readwrite("frame_dim", &SyntheticCorpusSpec::frame_dim)
      .def_readwrite("max_frames", &SyntheticCorpusSpec::max_frames)
      .def_readwrite("within_speaker_noise",
                     &SyntheticCorpusSpec::within_speaker_noise)
      .def_readwrite("label_noise_rate", &SyntheticCorpusSpec::label_noise_rate)
      .def_readwrite("seed", &SyntheticCorpusSpec::seed)
      .def("validate", &SyntheticCorpusSpec::validate);

  py::class_<Utterance>(m, "Utterance")
      .def_readonly("speaker", &Utterance::speaker)
      .def_readonly("label", &Utterance::label)
      .def_readonly("frames", &Utterance::frames);

  py::class_<Corpus>(m, "Corpus")
      .def_readonly("frame_dim", &Corpus::frame_dim)
      .def_readonly("num_speakers", &Corpus::num_speakers)
      .def_readonly("utterances_per_speaker", &Corpus::utterances_per_speaker)
      .def_readonly("utterances", &Corpus::utterances)
      .def("num_utterances", &Corpus::num_utterances);

  m.def("generate_corpus", &generate_corpus, py::arg("spec"));
  m.def("utterance_id", &utterance_id, py::arg("corpus"), py::arg("utt_index"));
  m.def("utterance_index", &utterance_index, py::arg("corpus"), py::arg("id"));

  py::enum_<Activation>(m, "Activation")
      .value("TANH", Activation::kTanh)
      .value("IDENTITY", Activation::kIdentity);

  py::class_<ToyModel>(m, "ToyModel")
      .def_readonly("frame_dim", &ToyModel::frame_dim)
      .def_readonly("hidden_dims", &ToyModel::hidden_dims)
      .def_readonly("embedding_dim", &ToyModel::embedding_dim)
      .def_readonly("num_classes", &ToyModel::num_classes)
      .def("num_parameters", &ToyModel::num_parameters);

  m.def("init_model", &init_model, py::arg("frame_dim"), py::arg("hidden_dims"),
        py::arg("embedding_dim"), py::arg("num_classes"), py::arg("activation"),
        py::arg("seed"));
  m.def(
      "forward_embed",
      [](const ToyModel& model, const std::vector<double>& chunk) {
        return forward_embed(model, chunk);
      },
      py::arg("model"), py::arg("chunk"));
  m.def(
      "class_cosines",
      [](const ToyModel& model, const std::vector<double>& embedding) {
        return class_cosines(model, embedding);
      },
      py::arg("model"), py::arg("embedding"));
  m.def("save_model", &save_model, py::arg("path"), py::arg("model"));
  m.def("load_model", &load_model, py::arg("path"));

  // ---- training ----
  py::enum_<MarginMode>(m, "MarginMode")
      .value("FIXED", MarginMode::kFixed)
      .value("STAGE", MarginMode::kStage)
      .value("CHUNK", MarginMode::kChunk);

  py::class_<ChunkInterval>(m, "ChunkInterval")
      .def(py::init<>())
      .def(py::init([](int l1, int l2) { return ChunkInterval{l1, l2}; }),
           py::arg("l1"), py::arg("l2"))
      .def_readwrite("l1", &ChunkInterval::l1)
      .def_readwrite("l2", &ChunkInterval::l2);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("loss", &TrainConfig::loss)
      .def_readwrite("margin_mode", &TrainConfig::margin_mode)
      .def_readwrite("stage_margins", &TrainConfig::stage_margins)
      .def_readwrite("chunk_m0", &TrainConfig::chunk_m0)
      .def_readwrite("chunk_lambda", &TrainConfig::chunk_lambda)
      .def_readwrite("chunk_intervals", &TrainConfig::chunk_intervals)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("lr_drop", &TrainConfig::lr_drop)
      .def_readwrite("momentum", &TrainConfig::momentum)
      .def_readwrite("weight_decay", &TrainConfig::weight_decay)
      .def_readwrite("hidden_dims", &TrainConfig::hidden_dims)
      .def_readwrite("embedding_dim", &TrainConfig::embedding_dim)
      .def_readwrite("activation", &TrainConfig::activation)
      .def_readwrite("seed", &TrainConfig::seed)
      .def("num_stages", &TrainConfig::num_stages)
      .def("validate", &TrainConfig::validate);

  py::class_<EpochDiagnostics>(m, "EpochDiagnostics")
      .def_readonly("epoch", &EpochDiagnostics::epoch)
      .def_readonly("s_p_mean", &EpochDiagnostics::s_p_mean)
      .def_readonly("s_n_mean", &EpochDiagnostics::s_n_mean)
      .def_readonly("r_mean", &EpochDiagnostics::r_mean)
      .def_readonly("loss_mean", &EpochDiagnostics::loss_mean)
      .def_readonly("margin", &EpochDiagnostics::margin);

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("model", &TrainResult::model)
      .def_readonly("diagnostics", &TrainResult::diagnostics);

  m.def("mean_radius", &mean_radius, py::arg("s_p_mean"), py::arg("s_n_mean"));
  m.def("reported_margin", &reported_margin, py::arg("spec"));
  m.def("train", &train, py::arg("config"), py::arg("corpus"),
        py::call_guard<py::gil_scoped_release>());
  m.def("training_accuracy", &training_accuracy, py::arg("model"), py::arg("corpus"));
  m.def("embed_corpus", &embed_corpus, py::arg("model"), py::arg("corpus"));

  // ---- metrics ----
  py::class_<TrialScore>(m, "TrialScore")
      .def(py::init<>())
      .def(py::init([](double score, bool is_target) {
             return TrialScore{score, is_target};
           }),
           py::arg("score"), py::arg("is_target"))
      .def_readwrite("score", &TrialScore::score)
      .def_readwrite("is_target", &TrialScore::is_target);

  py::class_<DcfSpec>(m, "DcfSpec")
      .def(py::init<>())
      .def_readwrite("p_target", &DcfSpec::p_target)
      .def_readwrite("c_miss", &DcfSpec::c_miss)
      .def_readwrite("c_fa", &DcfSpec::c_fa)
      .def("validate", &DcfSpec::validate);

  py::class_<Trial>(m, "Trial")
      .def(py::init<>())
      .def(py::init([](std::string enroll_id, std::string test_id, bool is_target) {
             return Trial{std::move(enroll_id), std::move(test_id), is_target};
           }),
           py::arg("enroll_id"), py::arg("test_id"), py::arg("is_target"))
      .def_readwrite("enroll_id", &Trial::enroll_id)
      .def_readwrite("test_id", &Trial::test_id)
      .def_readwrite("is_target", &Trial::is_target);

  py::class_<EerResult>(m, "EerResult")
      .def_readonly("eer", &EerResult::eer)
      .def_readonly("threshold", &EerResult::threshold);

  py::class_<DcfResult>(m, "DcfResult")
      .def_readonly("min_dcf", &DcfResult::min_dcf)
      .def_readonly("threshold", &DcfResult::threshold);

  py::class_<Histogram>(m, "Histogram")
      .def_readonly("edges", &Histogram::edges)
      .def_readonly("counts", &Histogram::counts);

  m.def(
      "cosine_score",
      [](const std::vector<double>& e1, const std::vector<double>& e2) {
        return cosine_score(e1, e2);
      },
      py::arg("e1"), py::arg("e2"));
  m.def(
      "compute_eer",
      [](const std::vector<TrialScore>& trials) { return compute_eer(trials); },
      py::arg("trials"));
  m.def(
      "compute_min_dcf",
      [](const std::vector<TrialScore>& trials, const DcfSpec& spec) {
        return compute_min_dcf(trials, spec);
      },
      py::arg("trials"), py::arg("spec"));
  m.def("score_trials", &score_trials, py::arg("embeddings"), py::arg("trials"));
  m.def(
      "similarity_histogram",
      [](const std::vector<double>& scores, int bin_count) {
        return similarity_histogram(scores, bin_count);
      },
      py::arg("scores"), py::arg("bin_count"));
}
