// llafs: command-line front end for the dataset, rendering, parsing and
// scoring workflows.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <thread>

#include "llafs/curriculum.hpp"
#include "llafs/dataset.hpp"
#include "llafs/error.hpp"
#include "llafs/eval.hpp"
#include "llafs/instruction.hpp"
#include "llafs/tablegen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitGeneration = 3;

std::string read_text(const std::string& path) {
  if (path.empty() || path == "-") {
    return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw llafs::Error(llafs::ErrorCode::kIo, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw llafs::Error(llafs::ErrorCode::kIo, "cannot write " + path);
  out << text;
}

llafs::Polygon16 polygon_from(const json& j) {
  if (!j.is_array() || j.size() != llafs::kPolygonVertices) {
    throw llafs::Error(llafs::ErrorCode::kTemplateInput, "a polygon needs 16 [x, y] vertices");
  }
  llafs::Polygon16 p;
  for (std::size_t k = 0; k < p.vertices.size(); ++k) {
    p.vertices[k] = {j[k].at(0).get<int>(), j[k].at(1).get<int>()};
  }
  return p;
}

std::vector<llafs::Polygon16> polygons_from(const json& j) {
  std::vector<llafs::Polygon16> out;
  for (const auto& p : j) out.push_back(polygon_from(p));
  return out;
}

std::vector<llafs::RegionOutline> regions_from(const json& j) {
  std::vector<llafs::RegionOutline> out;
  for (const auto& r : j) out.push_back({r.at("id").get<std::string>(), polygon_from(r.at("polygon"))});
  return out;
}

llafs::ImageSize size_from(const json& j) {
  if (!j.contains("size")) return {};
  const auto& s = j.at("size");
  return {s.at(0).get<int>(), s.at(1).get<int>()};
}

json polygon_json(const llafs::Polygon16& p) {
  json arr = json::array();
  for (const auto& v : p.vertices) arr.push_back({v.x, v.y});
  return arr;
}

// ---- gen -------------------------------------------------------------------

struct GenArgs {
  std::string config;
  std::string out;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  bool quiet = false;
};

int run_gen(const GenArgs& a) {
  const llafs::GenConfig cfg = llafs::load_config(a.config);
  llafs::ProgressFn progress;
  if (!a.quiet) {
    progress = [](std::int64_t done, std::int64_t total) {
      if (done == total || done % 100 == 0) {
        std::cerr << fmt::format("\rgenerated {}/{}", done, total) << std::flush;
      }
    };
  }
  try {
    const auto manifest = llafs::generate_dataset(cfg, a.out, a.jobs, progress);
    if (!a.quiet) std::cerr << "\n";
    std::cout << fmt::format("wrote {} pairs to {}\n", manifest.pairs.size(), a.out);
  } catch (const llafs::Error& e) {
    if (!a.quiet) std::cerr << "\n";
    if (e.code() == llafs::ErrorCode::kLayoutGeneration) {
      std::cerr << "llafs gen: " << e.what() << "\n";
      return kExitGeneration;
    }
    throw;
  }
  return kExitOk;
}

// ---- schedule --------------------------------------------------------------

struct ScheduleArgs {
  std::optional<std::int64_t> n;
  std::int64_t stride = 1000;
  std::string format = "text";
  std::string config;
};

int run_schedule(const ScheduleArgs& a) {
  llafs::ScheduleConfig cfg;
  if (!a.config.empty()) cfg = llafs::load_config(a.config).schedule;
  cfg.validate();
  const bool tsv = a.format == "tsv";
  if (tsv) std::cout << "n\ta\tb\tc\td\tM\n";
  auto emit = [&](std::int64_t n) {
    const auto s = llafs::step_params(n, cfg);
    if (tsv) {
      std::cout << fmt::format("{}\t{:g}\t{:g}\t{:g}\t{:g}\t{}\n", s.n, s.a, s.b, s.c, s.d, s.m);
    } else {
      std::cout << fmt::format("n={} a={:g} b={:g} c={:g} d={:g} M={}\n", s.n, s.a, s.b, s.c,
                               s.d, s.m);
    }
  };
  if (a.n) {
    emit(*a.n);
    return kExitOk;
  }
  for (std::int64_t n = 0; n < cfg.np; n += a.stride) emit(n);
  return kExitOk;
}

// ---- render ----------------------------------------------------------------

struct RenderArgs {
  std::string kind;
  std::string input;
  std::string dataset;
  std::int64_t pair = 0;
  std::string out;
};

int run_render(const RenderArgs& a) {
  llafs::RenderedInstruction r;
  if (a.kind == "pretrain") {
    if (a.dataset.empty()) {
      throw CLI::ValidationError("--dataset", "pretrain rendering needs --dataset and --pair");
    }
    const auto m = llafs::load_manifest(fs::path(a.dataset) / llafs::kManifestFile);
    if (a.pair < 0 || a.pair >= static_cast<std::int64_t>(m.pairs.size())) {
      throw CLI::ValidationError("--pair", fmt::format("pair index {} out of range", a.pair));
    }
    const auto& rec = m.pairs[static_cast<std::size_t>(a.pair)];
    llafs::PseudoPair pair;
    pair.width = m.side;
    pair.height = m.side;
    pair.support_polygons = rec.support_polygons;
    pair.query_polygons = rec.query_polygons;
    pair.hinted_indices = rec.hinted_indices;
    r = llafs::render_pretrain_instruction(pair, rec.hinted_indices, rec.step.m);
  } else {
    if (a.input.empty()) throw CLI::ValidationError("--input", "required for --kind " + a.kind);
    json j;
    try {
      j = json::parse(read_text(a.input));
      const auto category = j.at("category").get<std::string>();
      if (a.kind == "task") {
        const auto gt = polygons_from(j.at("support_gt"));
        r = llafs::render_task_instruction(category, size_from(j), gt);
      } else if (a.kind == "incontext") {
        const auto atts = j.at("attributes").get<std::vector<std::string>>();
        const auto table = llafs::table_from_json(j.at("table").dump());
        const auto regions = regions_from(j.at("regions"));
        r = llafs::render_incontext_instruction(category, atts, table, regions);
      } else {
        const auto atts = j.at("attributes").get<std::vector<std::string>>();
        std::vector<llafs::SupportShot> shots;
        for (const auto& s : j.at("shots")) {
          shots.push_back({polygons_from(s.at("ground_truth")),
                           llafs::table_from_json(s.at("table").dump()),
                           regions_from(s.at("regions"))});
        }
        r = llafs::render_multishot_instruction(category, atts, shots, size_from(j));
      }
    } catch (const json::exception& e) {
      throw llafs::Error(llafs::ErrorCode::kTemplateInput, std::string("input: ") + e.what());
    }
  }
  write_text(a.out, r.text + "\n");
  return kExitOk;
}

// ---- parse -----------------------------------------------------------------

struct ParseArgs {
  std::string input = "-";
  std::string out;
};

int run_parse(const ParseArgs& a) {
  const std::string text = read_text(a.input);
  llafs::PolygonTuple t;
  try {
    t = llafs::parse_polygon_output(text);
  } catch (const llafs::ParseError& e) {
    const std::string name = a.input == "-" ? "<stdin>" : a.input;
    std::cerr << fmt::format("{}: byte {}: {}\n", name, e.offset(), e.expectation());
    return kExitData;
  }
  json rec;
  json objects = json::array();
  json spans = json::array();
  for (std::size_t i = 0; i < t.objects.size(); ++i) {
    objects.push_back(polygon_json(t.objects[i]));
    spans.push_back({t.spans[i].begin, t.spans[i].end});
  }
  rec["objects"] = std::move(objects);
  rec["spans"] = std::move(spans);
  rec["canonical"] = llafs::encode_polygon_tuple(t.objects);
  write_text(a.out, rec.dump() + "\n");
  return kExitOk;
}

// ---- score -----------------------------------------------------------------

struct ScoreArgs {
  std::string pred;
  std::string gt;
  int folds = 1;
  std::string out;
  std::string csv;
};

llafs::PolygonTuple load_prediction(const fs::path& path) {
  const std::string text = read_text(path.string());
  if (path.extension() == ".json") {
    try {
      const auto j = json::parse(text);
      llafs::PolygonTuple t;
      t.objects = polygons_from(j.at("objects"));
      return t;
    } catch (const json::exception& e) {
      throw llafs::Error(llafs::ErrorCode::kValidation,
                         path.string() + ": " + std::string(e.what()));
    }
  }
  try {
    return llafs::parse_polygon_output(text);
  } catch (const llafs::ParseError& e) {
    throw llafs::Error(llafs::ErrorCode::kParse,
                       fmt::format("{}: byte {}: {}", path.string(), e.offset(), e.expectation()));
  }
}

int run_score(const ScoreArgs& a) {
  const fs::path root(a.gt);
  const auto manifest = llafs::load_manifest(root / llafs::kManifestFile);

  std::vector<std::pair<std::int64_t, fs::path>> preds;
  for (const auto& entry : fs::directory_iterator(a.pred)) {
    const fs::path& p = entry.path();
    if (!entry.is_regular_file() || (p.extension() != ".txt" && p.extension() != ".json")) {
      continue;
    }
    const std::string stem = p.stem().string();
    if (stem.empty() || !std::all_of(stem.begin(), stem.end(), ::isdigit)) continue;
    preds.emplace_back(std::stoll(stem), p);
  }
  std::sort(preds.begin(), preds.end());
  for (std::size_t i = 1; i < preds.size(); ++i) {
    if (preds[i].first == preds[i - 1].first) {
      throw llafs::Error(llafs::ErrorCode::kValidation,
                         fmt::format("two predictions for episode {}", preds[i].first));
    }
  }
  if (preds.empty()) {
    throw llafs::Error(llafs::ErrorCode::kValidation, "no predictions found in " + a.pred);
  }

  std::vector<llafs::EpisodeRecord> records;
  std::vector<std::string> labels;
  for (const auto& [index, path] : preds) {
    if (index < 0 || index >= static_cast<std::int64_t>(manifest.pairs.size())) {
      throw llafs::Error(llafs::ErrorCode::kValidation,
                         fmt::format("{}: no pair {} in the dataset", path.string(), index));
    }
    const auto& rec = manifest.pairs[static_cast<std::size_t>(index)];
    const auto gts = llafs::load_query_objects(manifest, rec, root);
    records.push_back(llafs::score_episode(load_prediction(path), gts,
                                           {manifest.side, manifest.side},
                                           fmt::format("{:06}", index)));
    labels.push_back(fmt::format("fold{}", index % a.folds));
  }
  const auto report = llafs::aggregate(records, labels);
  write_text(a.out, llafs::report_to_json(report));
  if (!a.csv.empty()) write_text(a.csv, llafs::report_to_csv(report));
  std::cout << llafs::report_summary(report);
  return kExitOk;
}

// ---- validate --------------------------------------------------------------

int run_validate(const std::string& dataset) {
  const fs::path root(dataset);
  const auto manifest = llafs::load_manifest(root / llafs::kManifestFile);
  const auto problems = llafs::validate_dataset(manifest, root);
  for (const auto& p : problems) std::cerr << p << "\n";
  if (!problems.empty()) return kExitData;
  std::cout << fmt::format("{}: {} pairs ok\n", dataset, manifest.pairs.size());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic pair generation, instruction rendering and polygon scoring"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "generate a pseudo support/query dataset");
  gen_cmd->add_option("--config", gen.config, "key = value config file")
      ->required()
      ->check(CLI::ExistingFile);
  gen_cmd->add_option("--out", gen.out, "output directory")->required();
  gen_cmd->add_option("--jobs,-j", gen.jobs, "worker threads")->check(CLI::Range(1u, 1024u));
  gen_cmd->add_flag("--quiet,-q", gen.quiet, "no progress output");

  ScheduleArgs sched;
  auto* sched_cmd = app.add_subcommand("schedule", "print curriculum parameters");
  sched_cmd->add_option("--n", sched.n, "single step");
  sched_cmd->add_option("--stride", sched.stride, "step stride")->check(CLI::PositiveNumber);
  sched_cmd->add_option("--format", sched.format, "text or tsv")
      ->check(CLI::IsMember({"text", "tsv"}));
  sched_cmd->add_option("--config", sched.config, "take schedule fields from a gen config")
      ->check(CLI::ExistingFile);

  RenderArgs render;
  auto* render_cmd = app.add_subcommand("render", "render an instruction");
  render_cmd->add_option("--kind", render.kind, "task, incontext, pretrain or multishot")
      ->required()
      ->check(CLI::IsMember({"task", "incontext", "pretrain", "multishot"}));
  render_cmd->add_option("--input", render.input, "JSON input (task, incontext, multishot)");
  render_cmd->add_option("--dataset", render.dataset, "dataset directory (pretrain)");
  render_cmd->add_option("--pair", render.pair, "pair index (pretrain)");
  render_cmd->add_option("--out,-o", render.out, "output file (default stdout)");

  ParseArgs parse;
  auto* parse_cmd = app.add_subcommand("parse", "parse model polygon output");
  parse_cmd->add_option("input", parse.input, "file with model output (default stdin)");
  parse_cmd->add_option("--out,-o", parse.out, "output file (default stdout)");

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand("score", "score predictions against a dataset");
  score_cmd->add_option("--pred", score.pred, "prediction directory (<index>.txt|.json)")
      ->required()
      ->check(CLI::ExistingDirectory);
  score_cmd->add_option("--gt", score.gt, "dataset directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  score_cmd->add_option("--folds", score.folds, "fold count (episode index mod K)")
      ->check(CLI::Range(1, 1000));
  score_cmd->add_option("--out,-o", score.out, "JSON report path")->required();
  score_cmd->add_option("--csv", score.csv, "CSV report path");

  std::string validate_dir;
  auto* validate_cmd = app.add_subcommand("validate", "check a dataset against its manifest");
  validate_cmd->add_option("dataset", validate_dir, "dataset directory")
      ->required()
      ->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen_cmd) return run_gen(gen);
    if (*sched_cmd) return run_schedule(sched);
    if (*render_cmd) return run_render(render);
    if (*parse_cmd) return run_parse(parse);
    if (*score_cmd) return run_score(score);
    if (*validate_cmd) return run_validate(validate_dir);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "llafs: " << e.what() << "\n";
    return kExitUsage;
  } catch (const llafs::Error& e) {
    std::cerr << "llafs: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "llafs: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
