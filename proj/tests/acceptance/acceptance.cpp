// Acceptance run: one PASS/FAIL line per top-level criterion.

#include <CLI11.hpp>
#include <fmt/core.h>
#include <json.hpp>
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <thread>

#include "llafs/curriculum.hpp"
#include "llafs/dataset.hpp"
#include "llafs/digest.hpp"
#include "llafs/error.hpp"
#include "llafs/eval.hpp"
#include "llafs/expert.hpp"
#include "llafs/instruction.hpp"
#include "llafs/random.hpp"
#include "llafs/synthesis.hpp"
#include "llafs/tablegen.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

fs::path g_workdir;

// ---------------------------------------------------------------------------

Outcome schedule_exactness() {
  const auto t0 = Clock::now();
  const llafs::ScheduleConfig cfg;
  bool ok = llafs::image_schedule(0, cfg) == llafs::DistanceBounds{100, 150, 0, 50} &&
            llafs::image_schedule(30000, cfg) == llafs::DistanceBounds{50, 100, 25, 75} &&
            llafs::image_schedule(60000, cfg) == llafs::DistanceBounds{0, 50, 50, 100};
  std::int64_t mismatches = 0;
  for (std::int64_t n = 0; n < cfg.np; ++n) {
    const std::int64_t want = n < cfg.np / 2 ? std::max<std::int64_t>(0, 15 - n / (cfg.np / 30)) : 0;
    mismatches += llafs::mask_schedule(n, cfg) != want;
  }
  const double secs = seconds_since(t0);
  ok = ok && mismatches == 0 && secs < 1.0;
  return {ok, fmt::format("endpoints exact, {} mask mismatches over 60000 steps, {:.3f} s", mismatches, secs)};
}

llafs::StepParams checkpoint(std::int64_t n, const llafs::ScheduleConfig& cfg) {
  if (n < cfg.np) return llafs::step_params(n, cfg);
  const auto b = llafs::image_schedule(n, cfg);
  return {n, b.a, b.b, b.c, b.d, 0};
}

int count_violations(const llafs::PseudoPair& p, const llafs::StepParams& s) {
  int v = 0;
  const auto& sm = p.support_means;
  const auto& qm = p.query_means;
  for (const auto& sb : sm.background) {
    const double d = llafs::color_distance(sb, sm.foreground);
    v += d < s.a || d > s.b;
  }
  const double gap = llafs::color_distance(qm.foreground, sm.foreground);
  v += gap < s.c || gap > s.d;
  for (const auto& qb : qm.background) {
    const double d = llafs::color_distance(qb, qm.foreground);
    v += d < s.a || d > s.b;
    v += llafs::color_distance(qb, sm.foreground) <= gap;
  }
  return v;
}

Outcome constraint_audit() {
  const llafs::ScheduleConfig cfg;
  const std::int64_t np = cfg.np;
  const std::int64_t checkpoints[] = {0, np / 4, np / 2, 3 * np / 4, np};
  const auto t0 = Clock::now();
  long violations = 0;
  int pairs = 0;
  for (std::size_t ci = 0; ci < 5; ++ci) {
    const auto step = checkpoint(checkpoints[ci], cfg);
    for (int i = 0; i < 2000; ++i) {
      const auto seed = llafs::split_seed(0xA0D17 + ci, static_cast<std::uint64_t>(i));
      violations += count_violations(llafs::generate_pair(seed, step, 384, 384), step);
      ++pairs;
    }
  }
  const double secs = seconds_since(t0);
  return {violations == 0 && secs < 300.0,
          fmt::format("{} pairs at 384x384, {} violations, {:.1f} s single-core", pairs, violations, secs)};
}

int run_shell(const std::string& cmd) {
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string tree_digest(const fs::path& root) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), root));
  }
  std::sort(files.begin(), files.end());
  llafs::Sha256 h;
  for (const auto& f : files) h.update(f.generic_string() + ":" + llafs::sha256_file(root / f) + "\n");
  return h.hex();
}

Outcome determinism() {
  const unsigned cores = std::max(1u, std::thread::hardware_concurrency());
  const fs::path conf = g_workdir / "determinism.conf";
  std::ofstream(conf) << "seed = 2024\ncount = 1000\nsize = 384\n";
  double worst = 0.0;
  std::string digests[2];
  std::string manifests[2];
  for (int run = 0; run < 2; ++run) {
    const fs::path out = g_workdir / ("gen" + std::to_string(run));
    fs::remove_all(out);
    const auto t0 = Clock::now();
#ifdef LLAFS_CLI_PATH
    const int rc = run_shell(fmt::format("'{}' gen -q -j {} --config '{}' --out '{}'", LLAFS_CLI_PATH, cores,
                                         conf.string(), out.string()));
    if (rc != 0) return {false, fmt::format("gen exited with {}", rc)};
#else
    llafs::generate_dataset(llafs::parse_config(oracle::read_file(conf)), out, cores);
#endif
    worst = std::max(worst, seconds_since(t0));
    digests[run] = tree_digest(out);
    manifests[run] = llafs::sha256_file(out / llafs::kManifestFile);
  }
  // 60 s on 8 cores, scaled to the cores present.
  const double budget = 60.0 * 8.0 / std::min(cores, 8u);
  const bool same = digests[0] == digests[1] && manifests[0] == manifests[1];
  return {same && worst < budget,
          fmt::format("{} trees, slowest run {:.1f} s on {} core(s), budget {:.0f} s", same ? "identical" : "DIFFERENT",
                      worst, cores, budget)};
}

llafs::BezierContour rotated_ellipse(double cx, double cy, double a, double b, double theta, double phase) {
  llafs::BezierContour c;
  for (int k = 0; k < llafs::kBezierControlPoints; ++k) {
    const double t = phase + k * 2.0 * std::numbers::pi / llafs::kBezierControlPoints;
    const double x = a * std::cos(t);
    const double y = b * std::sin(t);
    c.control_points.push_back(
        {cx + x * std::cos(theta) - y * std::sin(theta), cy + x * std::sin(theta) + y * std::cos(theta)});
  }
  return c;
}

double round_trip(const llafs::Mask& m) {
  const auto polys = llafs::extract_polygon_gt(m);
  if (polys.empty()) return 0.0;
  return oracle::iou(llafs::polygon_to_mask(polys[0], m.width(), m.height()), m);
}

Outcome polygon_fidelity() {
  llafs::Rng rng(582);
  double disk_min = 1.0;
  for (int i = 0; i < 40; ++i) {
    const double r = rng.uniform(50, 150);
    const auto m = oracle::disk(rng.uniform(185, 199), rng.uniform(185, 199), r, 384, 384);
    disk_min = std::min(disk_min, round_trip(m));
  }
  double sum = 0.0;
  double bez_min = 1.0;
  for (int i = 0; i < 100; ++i) {
    const double a = rng.uniform(30, 110);
    const double b = rng.uniform(30, 110);
    const auto c = rotated_ellipse(rng.uniform(130, 254), rng.uniform(130, 254), a, b, rng.uniform(0, std::numbers::pi),
                                   rng.uniform(0, 2 * std::numbers::pi));
    const double v = round_trip(llafs::rasterize(llafs::sample_bezier_contour(c), 384, 384));
    sum += v;
    bez_min = std::min(bez_min, v);
  }
  const double mean = sum / 100.0;
  return {disk_min >= 0.95 && mean >= 0.90 && bez_min >= 0.80,
          fmt::format("disk r in [50,150] min {:.4f}; convex Bezier mean {:.4f}, min {:.4f}", disk_min, mean, bez_min)};
}

Outcome parser() {
  llafs::Rng rng(583);
  int mismatches = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<llafs::Polygon16> objs(static_cast<std::size_t>(rng.uniform_int(1, 5)));
    for (auto& p : objs) {
      for (auto& v : p.vertices) {
        v = {static_cast<int>(rng.uniform_int(0, 383)), static_cast<int>(rng.uniform_int(0, 383))};
      }
    }
    try {
      mismatches += llafs::parse_polygon_output(llafs::encode_polygon_tuple(objs)).objects != objs;
    } catch (const llafs::Error&) {
      ++mismatches;
    }
  }
  std::istringstream tsv(oracle::read_file(oracle::fixture_path("parser/malformed/expected.tsv")));
  std::string line;
  int cases = 0;
  int rejected = 0;
  while (std::getline(tsv, line)) {
    if (line.empty() || line.front() == '#') continue;
    const auto t1 = line.find('\t');
    const auto t2 = line.find('\t', t1 + 1);
    const std::string file = line.substr(0, t1);
    const std::size_t offset = std::stoul(line.substr(t1 + 1, t2 - t1 - 1));
    ++cases;
    try {
      llafs::parse_polygon_output(oracle::read_file(oracle::fixture_path("parser/malformed/" + file)));
    } catch (const llafs::ParseError& e) {
      rejected += e.offset() == offset &&
                  std::string(e.what()).find("at byte " + std::to_string(offset)) != std::string::npos;
    }
  }
  return {mismatches == 0 && cases >= 20 && rejected == cases,
          fmt::format("10000 round trips, {} mismatches; {}/{} malformed fixtures rejected at the expected byte",
                      mismatches, rejected, cases)};
}

Outcome eq1_oracle() {
  llafs::Rng rng(584);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto dim = static_cast<std::size_t>(rng.uniform_int(2, 8));
    auto unit = [&] {
      llafs::Embedding v(dim);
      for (double& x : v) x = rng.normal();
      return llafs::normalized(std::move(v));
    };
    std::vector<llafs::Region> regions;
    std::vector<llafs::Attribute> atts;
    const auto nr = rng.uniform_int(1, 6);
    const auto na = rng.uniform_int(1, 10);
    for (std::int64_t i = 0; i < nr; ++i) regions.push_back({"r" + std::to_string(i), {}, unit()});
    for (std::int64_t j = 0; j < na; ++j) atts.push_back({"a" + std::to_string(j), unit()});
    const double alpha = rng.uniform(-0.3, 0.8);
    const auto table = llafs::build_table(regions, atts, alpha);
    const auto want = oracle::exhaustive_table(regions, atts, alpha);
    bool same = table.rows.size() == want.size();
    for (std::size_t i = 0; same && i < want.size(); ++i) same = table.rows[i].attributes == want[i];
    mismatches += !same;
  }
  return {mismatches == 0, fmt::format("1000 instances, {} differ from the exhaustive double loop", mismatches)};
}

Outcome refinement() {
  const oracle::KeywordEmbedder embedder({"eyes", "beak", "wing"});
  std::vector<llafs::Region> regions;
  for (const char* name : {"eyes", "beak", "wing"}) {
    regions.push_back({name, oracle::regular_polygon(100, 100, 20), embedder.embed_region(name)});
  }
  const auto atts =
      llafs::embed_attributes(std::vector<std::string>{"large eyes", "short beak", "brown feathers"}, embedder);
  auto run = [&](const char* file, llafs::ScriptedChat& chat) {
    chat = llafs::ScriptedChat::from_file(oracle::fixture_path(std::string("oracle/") + file));
    llafs::ChatExpertOracle expert(chat);
    return llafs::refine_table("owl", regions, atts, embedder, expert);
  };
  auto no_duplicates = [](const std::vector<std::string>& v) {
    auto s = v;
    std::sort(s.begin(), s.end());
    return std::adjacent_find(s.begin(), s.end()) == s.end();
  };
  llafs::ScriptedChat c0, c1, c3;
  const auto r0 = run("zero_iterations.txt", c0);
  const auto r1 = run("one_iteration.txt", c1);
  const auto r3 = run("three_iterations.txt", c3);
  const auto& p0 = r0.table.provenance;
  const auto& p1 = r1.table.provenance;
  const auto& p3 = r3.table.provenance;
  const bool ok = p0.iterations == 0 && p0.status == llafs::Resolution::kResolved && c0.requests().size() == 1 &&
                  p1.iterations == 1 && p1.status == llafs::Resolution::kResolved && p3.iterations == 3 &&
                  p3.status == llafs::Resolution::kUnresolved && no_duplicates(p1.discriminative_attributes) &&
                  no_duplicates(p3.discriminative_attributes) && no_duplicates(c3.requests());
  return {ok, fmt::format("iterations {}/{}/{}, final status {}, {} distinct discriminative attributes", p0.iterations,
                          p1.iterations, p3.iterations,
                          p3.status == llafs::Resolution::kUnresolved ? "unresolved" : "resolved",
                          p3.discriminative_attributes.size())};
}

Outcome matching() {
  llafs::Rng rng(586);
  int mismatches = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const auto np = static_cast<std::size_t>(rng.uniform_int(0, 6));
    const auto ng = static_cast<std::size_t>(rng.uniform_int(0, 6));
    auto blob = [&] {
      llafs::Mask m(24, 24);
      const auto x0 = rng.uniform_int(0, 22);
      const auto y0 = rng.uniform_int(0, 22);
      const auto x1 = rng.uniform_int(x0 + 1, 24);
      const auto y1 = rng.uniform_int(y0 + 1, 24);
      for (auto y = y0; y < y1; ++y)
        for (auto x = x0; x < x1; ++x) m.set(static_cast<int>(x), static_cast<int>(y));
      return m;
    };
    std::vector<llafs::Mask> preds, gts;
    for (std::size_t i = 0; i < np; ++i) preds.push_back(blob());
    for (std::size_t i = 0; i < ng; ++i) gts.push_back(blob());
    std::vector<double> m;
    for (const auto& p : preds)
      for (const auto& g : gts) m.push_back(oracle::iou(p, g));
    // Maximum total IoU is the minimum total cost (1 - IoU) over full matchings.
    const double best = oracle::brute_force_best_total(m, np, ng);
    mismatches += std::abs(llafs::match_masks(preds, gts).total_iou() - best) > 1e-9;
  }
  return {mismatches == 0, fmt::format("500 instances up to 6x6, {} differ from brute force", mismatches)};
}

std::vector<llafs::Polygon16> polygons(const json& j) {
  std::vector<llafs::Polygon16> out;
  for (const auto& pj : j) {
    llafs::Polygon16 p;
    for (std::size_t k = 0; k < 16; ++k) p.vertices[k] = {pj[k][0].get<int>(), pj[k][1].get<int>()};
    out.push_back(p);
  }
  return out;
}

std::vector<llafs::RegionOutline> outlines(const json& j) {
  std::vector<llafs::RegionOutline> out;
  for (const auto& r : j) out.push_back({r.at("id").get<std::string>(), polygons(json::array({r.at("polygon")}))[0]});
  return out;
}

Outcome template_goldens() {
  auto load = [](const std::string& name) { return json::parse(oracle::read_file(oracle::fixture_path("templates/" + name + ".json"))); };
  auto golden = [](const std::string& name) {
    auto g = oracle::read_file(oracle::fixture_path("templates/" + name + ".golden.txt"));
    if (!g.empty() && g.back() == '\n') g.pop_back();
    return g;
  };
  auto size = [](const json& j) { return llafs::ImageSize{j.at("size")[0].get<int>(), j.at("size")[1].get<int>()}; };
  std::vector<std::string> failed;

  const auto task = load("task");
  if (llafs::render_task_instruction(task.at("category").get<std::string>(), size(task), polygons(task.at("support_gt")))
          .text != golden("task"))
    failed.push_back("task");

  const auto ic = load("incontext");
  if (llafs::render_incontext_instruction(ic.at("category").get<std::string>(),
                                          ic.at("attributes").get<std::vector<std::string>>(),
                                          llafs::table_from_json(ic.at("table").dump()), outlines(ic.at("regions")))
          .text != golden("incontext"))
    failed.push_back("incontext");

  const auto pt = load("pretrain");
  llafs::PseudoPair pair;
  pair.width = pt.at("size")[0].get<int>();
  pair.height = pt.at("size")[1].get<int>();
  pair.support_polygons = polygons(json::array({pt.at("support_polygon")}));
  pair.query_polygons = polygons(json::array({pt.at("query_polygon")}));
  if (llafs::render_pretrain_instruction(pair, pt.at("hinted_indices").get<std::vector<int>>(), pt.at("m").get<int>())
          .text != golden("pretrain"))
    failed.push_back("pretrain");

  const auto ms = load("multishot");
  std::vector<llafs::SupportShot> shots;
  for (const auto& s : ms.at("shots")) {
    shots.push_back({polygons(s.at("ground_truth")), llafs::table_from_json(s.at("table").dump()), outlines(s.at("regions"))});
  }
  if (llafs::render_multishot_instruction(ms.at("category").get<std::string>(),
                                          ms.at("attributes").get<std::vector<std::string>>(), shots, size(ms))
          .text != golden("multishot"))
    failed.push_back("multishot");

  std::string detail = "task, incontext, pretrain, multishot";
  if (!failed.empty()) {
    detail += "; mismatched:";
    for (const auto& f : failed) detail += " " + f;
  } else {
    detail += " match character for character";
  }
  return {failed.empty(), detail};
}

Outcome monotonicity() {
  const llafs::ScheduleConfig cfg;
  const std::int64_t np = cfg.np;
  const std::int64_t checkpoints[] = {0, np / 4, np / 2, 3 * np / 4, np - 1};
  std::vector<double> means;
  for (std::size_t ci = 0; ci < 5; ++ci) {
    const auto step = llafs::step_params(checkpoints[ci], cfg);
    double sum = 0.0;
    for (int i = 0; i < 500; ++i) {
      const auto p = llafs::generate_pair(llafs::split_seed(0x5EED, static_cast<std::uint64_t>(i)), step, 384, 384);
      sum += oracle::iou(oracle::midpoint_threshold(p.query_image, p.query_means.foreground, p.query_means.background),
                         p.query_mask);
    }
    means.push_back(sum / 500.0);
  }
  bool ok = true;
  for (std::size_t i = 1; i < means.size(); ++i) ok = ok && means[i] <= means[i - 1];
  return {ok, fmt::format("mean oracle IoU {:.4f} {:.4f} {:.4f} {:.4f} {:.4f}", means[0], means[1], means[2], means[3],
                          means[4])};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"llafs acceptance run"};
  std::string workdir = (fs::temp_directory_path() / "llafs_acceptance").string();
  std::string only;
  app.add_option("--workdir", workdir, "scratch directory for generated datasets");
  app.add_option("--only", only, "run a single criterion by name");
  CLI11_PARSE(app, argc, argv);
  g_workdir = workdir;
  fs::create_directories(g_workdir);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"schedule-exactness", schedule_exactness}, {"constraint-audit", constraint_audit},
      {"determinism", determinism},               {"polygon-fidelity", polygon_fidelity},
      {"parser", parser},                         {"eq1-oracle", eq1_oracle},
      {"refinement-loop", refinement},            {"matching-optimality", matching},
      {"template-goldens", template_goldens},     {"difficulty-monotonicity", monotonicity},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    if (!only.empty() && name != only) continue;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    fmt::print("{} {}: {}\n", o.pass ? "PASS" : "FAIL", name, o.detail);
    std::fflush(stdout);
  }
  fs::remove_all(g_workdir / "gen0");
  fs::remove_all(g_workdir / "gen1");
  return failures == 0 ? 0 : 1;
}
