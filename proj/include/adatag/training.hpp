#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "adatag/corpus.hpp"
#include "adatag/model.hpp"
#include "adatag/optimizer.hpp"

namespace adatag::training {

// Mean CRF NLL over the batch, each example evaluated on its own.
double batch_loss(const Model& model, std::span<const TrainItem> batch);
// Same, from labeled examples; an attribute unknown to the model is a DataError.
double batch_loss(const Model& model, const std::vector<corpus::LabeledExample>& batch);

// Fills `grads` (cleared first) with the gradient of batch_loss and returns
// the loss. Examples run in parallel; their contributions are reduced in
// batch order, so the result does not depend on the thread count.
double batch_gradients(const Model& model, std::span<const TrainItem> batch, GradientBuffer& grads);

// Stops once `patience` consecutive epochs fail to beat the best score, so a
// peak at epoch e ends training at epoch e + patience.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

  // Records one epoch; returns true if it improved on the best score.
  bool update(double score);
  bool should_stop() const { return since_best_ >= patience_; }
  std::size_t best_epoch() const { return best_epoch_; }
  double best() const { return best_; }

 private:
  std::size_t patience_;
  std::size_t epoch_ = 0;
  std::size_t best_epoch_ = 0;
  std::size_t since_best_ = 0;
  double best_ = 0.0;
};

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double train_nll = 0.0;
  double dev_macro_f1 = 0.0;
  bool improved = false;
};

struct RunReport {
  std::string attribute;  // empty for a joint run
  std::size_t train_items = 0;
  std::vector<EpochLog> epochs;
  std::size_t best_epoch = 0;
  double best_dev_macro_f1 = 0.0;
  std::size_t stopped_epoch = 0;
  bool early_stopped = false;
};

struct TrainReport {
  Variant variant = Variant::kAdaTag;
  std::vector<RunReport> runs;  // one per attribute for per_attribute, else one
  double dev_macro_f1 = 0.0;    // of the final (restored) parameters
  std::size_t dropped_spans = 0;
  std::string checkpoint;

  std::string to_json() const;
};

struct TrainOptions {
  std::function<void(const RunReport&, const EpochLog&)> on_epoch;
};

// Adam on seeded shuffles, dev macro-F1 after every epoch (on parameters
// rounded to float32, the checkpoint type), early stopping after `patience`
// epochs without improvement. The best parameters are restored on return.
// A non-finite batch loss raises NumericalError naming the batch.
TrainReport train(Model& model, const std::vector<corpus::LabeledExample>& train_set,
                  const std::vector<corpus::LabeledExample>& dev_set, const TrainOptions& options = {});

}  // namespace adatag::training
