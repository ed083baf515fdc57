#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "dementia/health/preprocess.hpp"
#include "dementia/health/record.hpp"
#include "dementia/image/dataset.hpp"
#include "dementia/metrics/metrics.hpp"
#include "dementia/models/architectures.hpp"
#include "dementia/models/predict.hpp"
#include "dementia/models/training.hpp"
#include "dementia/models/weights.hpp"
#include "dementia/service/config.hpp"
#include "dementia/service/server.hpp"

namespace fs = std::filesystem;
using namespace dementia;

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), {}};
}

void print_progress(const models::EpochMetrics& m, std::size_t epochs) {
  std::fprintf(stderr, "epoch %zu/%zu  loss %.4f  acc %.4f  val_loss %.4f  val_acc %.4f\n", m.epoch, epochs,
               m.train_loss, m.train_acc, m.val_loss, m.val_acc);
}

void print_evaluation(const metrics::ReportRow& r) {
  const auto& s = r.summary;
  const auto flag = [](const metrics::Ratio& x) { return x.degenerate ? " (undefined: zero denominator)" : ""; };
  std::printf("samples    %zu\n", r.cm.total());
  std::printf("confusion  tp=%zu tn=%zu fp=%zu fn=%zu\n", r.cm.tp, r.cm.tn, r.cm.fp, r.cm.fn);
  std::printf("accuracy   %.6f%s\n", s.accuracy.value, flag(s.accuracy));
  std::printf("precision  %.6f%s\n", s.precision.value, flag(s.precision));
  std::printf("recall     %.6f%s\n", s.recall.value, flag(s.recall));
  std::printf("f1         %.6f%s\n", s.f1.value, flag(s.f1));
  if (r.auc)
    std::printf("auc        %.6f\n", *r.auc);
  else
    std::printf("auc        n/a (one class only)\n");
}

// Evaluates at the listed epochs (all when empty) and appends report rows.
struct EpochReporter {
  std::set<std::size_t> epochs;
  std::vector<metrics::ReportRow> rows;

  void maybe_record(std::size_t epoch, const nn::Model& model, nn::BatchSource& data) {
    if (!epochs.empty() && !epochs.contains(epoch)) return;
    const models::EvalResult r = models::evaluate(model, data);
    rows.push_back(metrics::report_row(epoch, r.scores, r.labels));
  }
};

void write_training_logs(const fs::path& out, const std::vector<models::EpochMetrics>& log,
                         const EpochReporter& reporter) {
  fs::path log_path = out;
  log_path += ".epochs.csv";
  auto log_out = open_out(log_path);
  models::write_epoch_log_csv(log_out, log);
  fs::path report_path = out;
  report_path += ".report.csv";
  auto report_out = open_out(report_path);
  metrics::write_report_csv(report_out, reporter.rows);
  std::fprintf(stderr, "wrote %s, %s and %s\n", out.c_str(), log_path.c_str(), report_path.c_str());
}

struct TrainOptions {
  fs::path data, out;
  std::size_t epochs = 0, batch = 32;
  double lr = 0;
  std::uint64_t seed = 1;
  std::vector<std::size_t> report_epochs;
};

int train_1d(const TrainOptions& o) {
  const auto records = health::read_health_csv_file(o.data.string());
  const health::PreparedHealthData prep = health::prepare_health_data(records, o.seed);
  std::fprintf(stderr, "records %zu  train %zu (SMOTE added %zu)  validation %zu  test %zu\n", records.size(),
               prep.sets.train.size(), prep.synthetic_added, prep.sets.validation.size(), prep.sets.test.size());

  nn::Model model = models::build_mod1d(o.seed);
  health::HealthBatcher train_src(prep.sets.train, o.batch, o.seed);
  health::HealthBatcher val_src(prep.sets.validation, o.batch, o.seed, false);
  health::HealthBatcher test_src(prep.sets.test, o.batch, o.seed, false);
  const models::TrainConfig cfg{o.lr, o.epochs, o.batch, o.seed};
  EpochReporter reporter{{o.report_epochs.begin(), o.report_epochs.end()}, {}};
  const auto log = models::train(model, train_src, &val_src, cfg, [&](const models::EpochMetrics& m) {
    print_progress(m, o.epochs);
    reporter.maybe_record(m.epoch, model, test_src);
  });

  models::save_weights(o.out, model, models::Architecture::Mod1D, models::scaler_extras(prep.scaler));
  write_training_logs(o.out, log, reporter);
  const auto test = models::evaluate(model, test_src);
  std::printf("test partition\n");
  print_evaluation(metrics::report_row(o.epochs, test.scores, test.labels));
  return 0;
}

int train_2d(const TrainOptions& o, std::size_t side, bool augment) {
  const image::ImageDataset data = image::load_dataset(o.data, side);
  for (const auto& w : data.report.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  std::fprintf(stderr, "images train %zu  validation %zu  test %zu  (skipped %zu)\n", data.train.size(),
               data.validation.size(), data.test.size(), data.report.skipped);

  nn::Model model = models::build_mod2d(o.seed, side);
  image::AugmentConfig aug;
  aug.rng_seed = o.seed;
  image::ImageBatcher train_src(data.train, o.batch, o.seed, augment, aug);
  image::ImageBatcher val_src(data.validation, o.batch, o.seed, false, {}, false);
  image::ImageBatcher test_src(data.test, o.batch, o.seed, false, {}, false);
  const models::TrainConfig cfg{o.lr, o.epochs, o.batch, o.seed};
  EpochReporter reporter{{o.report_epochs.begin(), o.report_epochs.end()}, {}};
  nn::BatchSource* val = data.validation.empty() ? nullptr : &val_src;
  const auto log = models::train(model, train_src, val, cfg, [&](const models::EpochMetrics& m) {
    print_progress(m, o.epochs);
    if (!data.test.empty()) reporter.maybe_record(m.epoch, model, test_src);
  });

  models::save_weights(o.out, model, models::Architecture::Mod2D);
  write_training_logs(o.out, log, reporter);
  if (!data.test.empty()) {
    const auto test = models::evaluate(model, test_src);
    std::printf("test partition\n");
    print_evaluation(metrics::report_row(o.epochs, test.scores, test.labels));
  }
  return 0;
}

// `score,label` rows with a header line.
void read_scores_csv(const fs::path& path, std::vector<double>& scores, std::vector<int>& labels) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("score,label", 0) != 0) throw std::runtime_error(path.string() + ": expected header score,label");
  for (std::size_t n = 2; std::getline(in, line); ++n) {
    if (line.empty() || line == "\r") continue;
    std::istringstream row(line);
    double s;
    char comma;
    int l;
    if (!(row >> s >> comma >> l) || comma != ',')
      throw std::runtime_error(path.string() + ":" + std::to_string(n) + ": malformed row");
    scores.push_back(s);
    labels.push_back(l);
  }
}

struct EvaluateOptions {
  fs::path model, data, scores, roc_out, report_out;
  std::string split = "test";
};

int evaluate(const EvaluateOptions& o) {
  std::vector<double> scores;
  std::vector<int> labels;
  if (!o.scores.empty()) {
    read_scores_csv(o.scores, scores, labels);
  } else {
    if (o.model.empty() || o.data.empty()) throw CLI::ValidationError("evaluate needs --model and --data, or --scores");
    models::LoadedModel loaded = models::load_weights(o.model);
    models::EvalResult r;
    if (loaded.architecture == models::Architecture::Mod1D) {
      const auto scaler = models::scaler_from_extras(loaded.extras);
      const auto rows = scaler.transform(health::to_labeled_vectors(health::read_health_csv_file(o.data.string())));
      health::HealthBatcher src(rows, 64, 0, false);
      r = models::evaluate(loaded.model, src);
    } else {
      const std::size_t side = loaded.model.input_shape().at(0);
      const image::ImageDataset data = image::load_dataset(o.data, side);
      const auto it = std::find(image::kSplitDirs.begin(), image::kSplitDirs.end(), o.split);
      const auto& samples = data.split(static_cast<std::size_t>(it - image::kSplitDirs.begin()));
      image::ImageBatcher src(samples, 16, 0, false, {}, false);
      r = models::evaluate(loaded.model, src);
    }
    scores = std::move(r.scores);
    labels = std::move(r.labels);
  }
  const metrics::ReportRow row = metrics::report_row(0, scores, labels);
  print_evaluation(row);
  if (!o.report_out.empty()) {
    auto out = open_out(o.report_out);
    metrics::write_report_csv(out, std::span(&row, 1));
  }
  if (!o.roc_out.empty()) {
    if (!row.auc) throw std::runtime_error("ROC needs both classes in the data");
    auto out = open_out(o.roc_out);
    metrics::write_roc_csv(out, metrics::roc(scores, labels));
  }
  return 0;
}

void print_prediction(const models::PredictionResult& p) {
  std::printf("{\"score\": %.9g, \"label\": %d, \"label_name\": \"%s\", \"model\": \"%s\"}\n", p.score,
              p.label == models::PredictedLabel::Demented ? 1 : 0, std::string(models::to_string(p.label)).c_str(),
              std::string(models::to_string(p.model)).c_str());
}

void write_pgm(const fs::path& path, const nn::Tensor& map) {
  auto out = open_out(path);
  out << "P5\n" << map.extent(1) << ' ' << map.extent(0) << "\n255\n";
  for (const float v : map.data()) out.put(static_cast<char>(static_cast<std::uint8_t>(std::lround(v * 255.0f))));
}

int feature_maps(const fs::path& model_path, const fs::path& image_path, std::size_t layer, const fs::path& out_dir,
                 std::size_t columns, bool per_map) {
  const models::LoadedModel loaded = models::load_weights(model_path, models::Architecture::Mod2D);
  const nn::Tensor pixels = image::load_image_file(image_path, loaded.model.input_shape().at(0));
  const auto maps = models::extract_feature_maps(loaded.model, pixels, layer);
  fs::create_directories(out_dir);
  image::write_png(out_dir / "grid.png", models::feature_map_grid(maps, columns));
  if (per_map) {
    for (std::size_t i = 0; i < maps.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "map_%03zu.pgm", i);
      write_pgm(out_dir / name, maps[i]);
    }
  }
  std::printf("%zu maps of %zux%zu from layer %zu -> %s\n", maps.size(), maps[0].extent(0), maps[0].extent(1), layer,
              (out_dir / "grid.png").c_str());
  return 0;
}

int synth_data(const std::string& kind, std::size_t n, std::uint64_t seed, const fs::path& out, std::size_t side) {
  if (kind == "health") {
    auto file = open_out(out);
    health::write_health_csv(file, health::synthesize_health_records(n, seed));
    std::printf("%zu health records -> %s\n", n, out.c_str());
  } else {
    // n images split 70/10/20 across train/validation/test, half per class.
    const auto per_class = [&](double frac) { return std::max<std::size_t>(1, std::llround(n * frac / 2.0)); };
    const std::array<std::size_t, 3> split{per_class(0.7), per_class(0.1), per_class(0.2)};
    image::synthesize_image_corpus(out, split, side, seed);
    std::printf("%zu/%zu/%zu images per class (train/validation/test) at %zupx -> %s\n", split[0], split[1], split[2],
                side, out.c_str());
  }
  return 0;
}

int serve(const fs::path& config_path, service::ServiceConfig overrides, const std::set<std::string>& given) {
  service::ServiceConfig cfg = config_path.empty() ? service::ServiceConfig{} : service::load_config_file(config_path);
  if (given.contains("port")) cfg.port = overrides.port;
  if (given.contains("host")) cfg.host = overrides.host;
  if (given.contains("weights-1d")) cfg.weights_1d = overrides.weights_1d;
  if (given.contains("weights-2d")) cfg.weights_2d = overrides.weights_2d;
  if (given.contains("static-dir")) cfg.static_dir = overrides.static_dir;
  if (cfg.weights_1d.empty() || cfg.weights_2d.empty())
    throw CLI::ValidationError("serve needs weights_1d and weights_2d (flags or config file)");
  cfg.validate();

  auto registry = std::make_shared<const service::ModelRegistry>(service::ModelRegistry::load(cfg.weights_1d, cfg.weights_2d));
  service::ScreeningService svc(registry, cfg);
  service::HttpServer server(svc, cfg.static_dir);
  std::fprintf(stderr, "serving on http://%s:%u (MOD-1D %zu params, MOD-2D %zu params)\n", cfg.host.c_str(),
               static_cast<unsigned>(cfg.port), registry->health_info().params, registry->face_info().params);
  server.run(cfg.host, cfg.port);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gamified dementia screening: model training, evaluation, prediction and the screening service"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  std::function<int()> action;

  TrainOptions t1;
  t1.epochs = 200;
  t1.lr = 1e-3;
  auto* c_t1 = app.add_subcommand("train-1d", "Train MOD-1D-CNN on a health CSV");
  c_t1->add_option("--data", t1.data, "Health CSV")->required()->check(CLI::ExistingFile);
  c_t1->add_option("--out", t1.out, "Output weights file")->required();
  c_t1->add_option("--epochs", t1.epochs)->capture_default_str()->check(CLI::PositiveNumber);
  c_t1->add_option("--batch", t1.batch)->capture_default_str()->check(CLI::PositiveNumber);
  c_t1->add_option("--lr", t1.lr)->capture_default_str()->check(CLI::PositiveNumber);
  c_t1->add_option("--seed", t1.seed)->capture_default_str();
  c_t1->add_option("--report-epochs", t1.report_epochs, "Epochs to evaluate on the test partition (default all)")
      ->delimiter(',');
  c_t1->callback([&] { action = [&] { return train_1d(t1); }; });

  TrainOptions t2;
  t2.epochs = 50;
  t2.lr = 1e-4;
  std::size_t t2_side = image::kImageSide;
  bool t2_augment = true;
  auto* c_t2 = app.add_subcommand("train-2d", "Train MOD-2D-CNN on an image directory tree");
  c_t2->add_option("--data", t2.data, "Root with train/validation/test class folders")->required()->check(CLI::ExistingDirectory);
  c_t2->add_option("--out", t2.out, "Output weights file")->required();
  c_t2->add_option("--epochs", t2.epochs)->capture_default_str()->check(CLI::PositiveNumber);
  c_t2->add_option("--batch", t2.batch)->capture_default_str()->check(CLI::PositiveNumber);
  c_t2->add_option("--lr", t2.lr)->capture_default_str()->check(CLI::PositiveNumber);
  c_t2->add_option("--seed", t2.seed)->capture_default_str();
  c_t2->add_option("--side", t2_side, "Input side in pixels; dense widths scale with it")->capture_default_str()->check(CLI::Range(16, 1024));
  c_t2->add_flag("--augment,!--no-augment", t2_augment, "Random affine + flip augmentation of training batches")->capture_default_str();
  c_t2->add_option("--report-epochs", t2.report_epochs, "Epochs to evaluate on the test partition (default all)")
      ->delimiter(',');
  c_t2->callback([&] { action = [&] { return train_2d(t2, t2_side, t2_augment); }; });

  EvaluateOptions ev;
  auto* c_ev = app.add_subcommand("evaluate", "Accuracy, precision, recall, F1 and ROC for a model or a score file");
  c_ev->add_option("--model", ev.model, "Weights file")->check(CLI::ExistingFile);
  c_ev->add_option("--data", ev.data, "Health CSV (MOD-1D) or image root (MOD-2D)")->check(CLI::ExistingPath);
  c_ev->add_option("--split", ev.split, "Image split to score")->capture_default_str()->check(CLI::IsMember({"train", "validation", "test"}));
  c_ev->add_option("--scores", ev.scores, "CSV of score,label rows instead of a model")->check(CLI::ExistingFile);
  c_ev->add_option("--roc", ev.roc_out, "Write the ROC curve as threshold,fpr,tpr CSV");
  c_ev->add_option("--report", ev.report_out, "Write the metrics row as CSV");
  c_ev->callback([&] { action = [&] { return evaluate(ev); }; });

  fs::path ph_model;
  health::HealthRecord rec;
  auto* c_ph = app.add_subcommand("predict-health", "Score one set of health metrics with MOD-1D-CNN");
  c_ph->add_option("--model", ph_model)->required()->check(CLI::ExistingFile);
  c_ph->add_option("--age", rec.age, "Years")->required();
  c_ph->add_option("--blood-oxygen", rec.blood_oxygen, "SpO2 percent")->required();
  c_ph->add_option("--heart-rate", rec.heart_rate, "Beats per minute")->required();
  c_ph->add_option("--body-temp", rec.body_temp, "Degrees Celsius")->required();
  c_ph->add_option("--weight", rec.weight, "Kilograms")->required();
  c_ph->add_option("--diabetic", rec.diabetic, "0 or 1")->required()->check(CLI::Range(0, 1));
  c_ph->callback([&] {
    action = [&] {
      const auto loaded = models::load_weights(ph_model, models::Architecture::Mod1D);
      print_prediction(models::predict_health(loaded.model, rec, models::scaler_from_extras(loaded.extras)));
      return 0;
    };
  });

  fs::path pf_model, pf_image;
  auto* c_pf = app.add_subcommand("predict-face", "Score one facial image with MOD-2D-CNN");
  c_pf->add_option("--model", pf_model)->required()->check(CLI::ExistingFile);
  c_pf->add_option("--image", pf_image, "PNG or JPEG")->required()->check(CLI::ExistingFile);
  c_pf->callback([&] {
    action = [&] {
      const auto loaded = models::load_weights(pf_model, models::Architecture::Mod2D);
      print_prediction(models::predict_face(loaded.model, read_bytes(pf_image)));
      return 0;
    };
  });

  fs::path fm_model, fm_image, fm_out;
  std::size_t fm_layer = 0, fm_columns = 8;
  bool fm_per_map = false;
  auto* c_fm = app.add_subcommand("feature-maps", "Render the activations of one MOD-2D-CNN conv layer");
  c_fm->add_option("--model", fm_model)->required()->check(CLI::ExistingFile);
  c_fm->add_option("--image", fm_image)->required()->check(CLI::ExistingFile);
  c_fm->add_option("--layer", fm_layer, "Layer index (0, 2, 4, 6 are the conv layers)")->capture_default_str();
  c_fm->add_option("--out-dir", fm_out)->required();
  c_fm->add_option("--columns", fm_columns)->capture_default_str()->check(CLI::PositiveNumber);
  c_fm->add_flag("--per-map", fm_per_map, "Also write every map as an 8-bit PGM");
  c_fm->callback([&] { action = [&] { return feature_maps(fm_model, fm_image, fm_layer, fm_out, fm_columns, fm_per_map); }; });

  std::string sd_kind;
  std::size_t sd_n = 0, sd_side = image::kImageSide;
  std::uint64_t sd_seed = 1;
  fs::path sd_out;
  auto* c_sd = app.add_subcommand("synth-data", "Generate a seeded synthetic health CSV or image corpus");
  c_sd->add_option("--kind", sd_kind)->required()->check(CLI::IsMember({"health", "images"}));
  c_sd->add_option("--n", sd_n, "Records, or total images")->required()->check(CLI::PositiveNumber);
  c_sd->add_option("--seed", sd_seed)->capture_default_str();
  c_sd->add_option("--out", sd_out, "CSV path or corpus root")->required();
  c_sd->add_option("--side", sd_side, "Image side in pixels")->capture_default_str()->check(CLI::Range(8, 1024));
  c_sd->callback([&] { action = [&] { return synth_data(sd_kind, sd_n, sd_seed, sd_out, sd_side); }; });

  fs::path sv_config;
  service::ServiceConfig sv;
  int sv_port = sv.port;
  auto* c_sv = app.add_subcommand("serve", "Run the screening HTTP service");
  c_sv->add_option("--config", sv_config, "key = value config file")->check(CLI::ExistingFile);
  c_sv->add_option("--port", sv_port)->check(CLI::Range(0, 65535));
  c_sv->add_option("--host", sv.host);
  c_sv->add_option("--weights-1d", sv.weights_1d)->check(CLI::ExistingFile);
  c_sv->add_option("--weights-2d", sv.weights_2d)->check(CLI::ExistingFile);
  c_sv->add_option("--static-dir", sv.static_dir, "Serve the game-ui bundle from here")->check(CLI::ExistingDirectory);
  c_sv->callback([&] {
    action = [&] {
      std::set<std::string> given;
      for (const char* name : {"port", "host", "weights-1d", "weights-2d", "static-dir"})
        if (c_sv->count(std::string("--") + name) > 0) given.insert(name);
      sv.port = static_cast<std::uint16_t>(sv_port);
      return serve(sv_config, sv, given);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    return action();
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n%s", e.what(), app.help().c_str());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
