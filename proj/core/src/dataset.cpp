#include "llafs/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <fmt/format.h>
#include <fstream>
#include <json.hpp>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "llafs/digest.hpp"
#include "llafs/error.hpp"
#include "llafs/image_io.hpp"
#include "llafs/instruction.hpp"
#include "llafs/random.hpp"

namespace llafs {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string_view to_string(StepPolicy policy) noexcept {
  return policy == StepPolicy::kFixed ? "fixed" : "sequential";
}

void GenConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kConfig, msg); };
  if (count < 0) fail("count must be >= 0");
  if (size < kMinLayoutSide || size > kCoordVocabulary) {
    fail(fmt::format("size must lie in [{}, {}] (coordinate vocabulary), got {}", kMinLayoutSide,
                     kCoordVocabulary, size));
  }
  if (!(sigma > 0.0)) fail("sigma must be positive");
  try {
    schedule.validate();
  } catch (const Error& e) {
    fail(e.what());
  }
  if (step_policy == StepPolicy::kFixed && (step < 0 || step >= schedule.np)) {
    fail(fmt::format("step must lie in [0, {}), got {}", schedule.np, step));
  }
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view value, std::string_view key, int line) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw Error(ErrorCode::kConfig, fmt::format("line {}: invalid value '{}' for key '{}'", line,
                                                value, key));
  }
  return out;
}

json polygon_json(const Polygon16& p) {
  json arr = json::array();
  for (const auto& v : p.vertices) arr.push_back({v.x, v.y});
  return arr;
}

Polygon16 polygon_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != kPolygonVertices) {
    throw Error(ErrorCode::kValidation, "polygon must have 16 vertices");
  }
  Polygon16 p;
  for (std::size_t k = 0; k < p.vertices.size(); ++k) {
    p.vertices[k] = {j[k].at(0).get<int>(), j[k].at(1).get<int>()};
  }
  return p;
}

json polygons_json(const std::vector<Polygon16>& ps) {
  json arr = json::array();
  for (const auto& p : ps) arr.push_back(polygon_json(p));
  return arr;
}

std::vector<Polygon16> polygons_from(const nlohmann::json& j) {
  std::vector<Polygon16> out;
  for (const auto& p : j) out.push_back(polygon_from(p));
  return out;
}

json colors_json(const std::vector<Color>& cs) {
  json arr = json::array();
  for (const auto& c : cs) arr.push_back(c);
  return arr;
}

json schedule_json(const ScheduleConfig& s) {
  return {{"a0", s.a0}, {"b0", s.b0}, {"c_np", s.c_np}, {"d_np", s.d_np}, {"np", s.np}};
}

ScheduleConfig schedule_from(const nlohmann::json& j) {
  ScheduleConfig s;
  s.a0 = j.at("a0").get<double>();
  s.b0 = j.at("b0").get<double>();
  s.c_np = j.at("c_np").get<double>();
  s.d_np = j.at("d_np").get<double>();
  s.np = j.at("np").get<std::int64_t>();
  return s;
}

json record_json(const PairRecord& r) {
  json files = json::object();
  for (const auto& [name, f] : r.files) files[name] = {{"path", f.path}, {"sha256", f.sha256}};
  return {{"index", r.index},
          {"seed", r.seed},
          {"step",
           {{"n", r.step.n},
            {"a", r.step.a},
            {"b", r.step.b},
            {"c", r.step.c},
            {"d", r.step.d},
            {"m", r.step.m}}},
          {"means",
           {{"support_foreground", r.support_fg_mean},
            {"support_background", colors_json(r.support_bg_means)},
            {"query_foreground", r.query_fg_mean},
            {"query_background", colors_json(r.query_bg_means)}}},
          {"support_polygons", polygons_json(r.support_polygons)},
          {"query_polygons", polygons_json(r.query_polygons)},
          {"hinted_indices", r.hinted_indices},
          {"files", std::move(files)},
          {"content_digest", r.content_digest}};
}

PairRecord record_from(const nlohmann::json& j) {
  PairRecord r;
  r.index = j.at("index").get<std::int64_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  const auto& s = j.at("step");
  r.step = {s.at("n").get<std::int64_t>(), s.at("a").get<double>(), s.at("b").get<double>(),
            s.at("c").get<double>(),       s.at("d").get<double>(), s.at("m").get<int>()};
  const auto& m = j.at("means");
  r.support_fg_mean = m.at("support_foreground").get<Color>();
  r.support_bg_means = m.at("support_background").get<std::vector<Color>>();
  r.query_fg_mean = m.at("query_foreground").get<Color>();
  r.query_bg_means = m.at("query_background").get<std::vector<Color>>();
  r.support_polygons = polygons_from(j.at("support_polygons"));
  r.query_polygons = polygons_from(j.at("query_polygons"));
  r.hinted_indices = j.at("hinted_indices").get<std::vector<int>>();
  for (const auto& [name, f] : j.at("files").items()) {
    r.files[name] = {f.at("path").get<std::string>(), f.at("sha256").get<std::string>()};
  }
  r.content_digest = j.at("content_digest").get<std::string>();
  return r;
}

std::string content_digest(const std::map<std::string, PairFile>& files) {
  Sha256 h;
  for (const auto& [name, f] : files) h.update(name + ":" + f.sha256 + "\n");
  return h.hex();
}

}  // namespace

GenConfig parse_config(std::string_view text) {
  GenConfig cfg;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view s = trim(raw);
    if (s.empty() || s.front() == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kConfig, fmt::format("line {}: expected key = value", line));
    }
    const std::string_view key = trim(s.substr(0, eq));
    const std::string_view value = trim(s.substr(eq + 1));
    if (key == "seed") {
      cfg.seed = parse_number<std::uint64_t>(value, key, line);
    } else if (key == "count") {
      cfg.count = parse_number<std::int64_t>(value, key, line);
    } else if (key == "size") {
      cfg.size = parse_number<int>(value, key, line);
    } else if (key == "a0") {
      cfg.schedule.a0 = parse_number<double>(value, key, line);
    } else if (key == "b0") {
      cfg.schedule.b0 = parse_number<double>(value, key, line);
    } else if (key == "c_np") {
      cfg.schedule.c_np = parse_number<double>(value, key, line);
    } else if (key == "d_np") {
      cfg.schedule.d_np = parse_number<double>(value, key, line);
    } else if (key == "np") {
      cfg.schedule.np = parse_number<std::int64_t>(value, key, line);
    } else if (key == "sigma") {
      cfg.sigma = parse_number<double>(value, key, line);
    } else if (key == "min_area") {
      cfg.min_area = parse_number<std::size_t>(value, key, line);
    } else if (key == "step") {
      cfg.step = parse_number<std::int64_t>(value, key, line);
    } else if (key == "step_policy") {
      if (value == "sequential") {
        cfg.step_policy = StepPolicy::kSequential;
      } else if (value == "fixed") {
        cfg.step_policy = StepPolicy::kFixed;
      } else {
        throw Error(ErrorCode::kConfig,
                    fmt::format("line {}: step_policy must be sequential or fixed", line));
      }
    } else {
      throw Error(ErrorCode::kConfig, fmt::format("line {}: unknown key '{}'", line, key));
    }
  }
  cfg.validate();
  return cfg;
}

GenConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kConfig, "cannot read config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string render_config(const GenConfig& c) {
  return fmt::format(
      "seed = {}\ncount = {}\nsize = {}\na0 = {}\nb0 = {}\nc_np = {}\nd_np = {}\nnp = {}\n"
      "sigma = {}\nmin_area = {}\nstep_policy = {}\nstep = {}\n",
      c.seed, c.count, c.size, c.schedule.a0, c.schedule.b0, c.schedule.c_np, c.schedule.d_np,
      c.schedule.np, c.sigma, c.min_area, to_string(c.step_policy), c.step);
}

std::int64_t pair_step(const GenConfig& config, std::int64_t index) {
  if (config.step_policy == StepPolicy::kFixed) return config.step;
  if (index < 0 || index >= config.count) {
    throw Error(ErrorCode::kParameter, "pair index out of range");
  }
  const std::int64_t q = config.schedule.np / config.count;
  const std::int64_t r = config.schedule.np % config.count;
  return index * q + index * r / config.count;
}

std::uint64_t pair_seed(const GenConfig& config, std::int64_t index) {
  return split_seed(config.seed, static_cast<std::uint64_t>(index));
}

std::string manifest_to_json(const DatasetManifest& m) {
  json j;
  j["version"] = m.version;
  j["side"] = m.side;
  j["schedule"] = schedule_json(m.schedule);
  j["seed"] = m.seed;
  j["count"] = m.count;
  j["sigma"] = m.sigma;
  j["min_area"] = m.min_area;
  j["step_policy"] = std::string(to_string(m.step_policy));
  j["step"] = m.step;
  json pairs = json::array();
  for (const auto& r : m.pairs) pairs.push_back(record_json(r));
  j["pairs"] = std::move(pairs);
  return j.dump(2) + "\n";
}

DatasetManifest manifest_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    DatasetManifest m;
    m.version = j.at("version").get<int>();
    if (m.version != kManifestVersion) {
      throw Error(ErrorCode::kValidation,
                  fmt::format("unsupported manifest version {}", m.version));
    }
    m.side = j.at("side").get<int>();
    m.schedule = schedule_from(j.at("schedule"));
    m.seed = j.at("seed").get<std::uint64_t>();
    m.count = j.at("count").get<std::int64_t>();
    m.sigma = j.at("sigma").get<double>();
    m.min_area = j.at("min_area").get<std::size_t>();
    const auto policy = j.at("step_policy").get<std::string>();
    if (policy != "sequential" && policy != "fixed") {
      throw Error(ErrorCode::kValidation, "unknown step_policy '" + policy + "'");
    }
    m.step_policy = policy == "fixed" ? StepPolicy::kFixed : StepPolicy::kSequential;
    m.step = j.at("step").get<std::int64_t>();
    for (const auto& r : j.at("pairs")) m.pairs.push_back(record_from(r));
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kValidation, std::string("manifest: ") + e.what());
  }
}

void save_manifest(const DatasetManifest& manifest, const fs::path& path) {
  const std::string text = manifest_to_json(manifest);
  write_file_atomic(path, text.data(), text.size());
}

DatasetManifest load_manifest(const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  return manifest_from_json(std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                             bytes.size()));
}

std::string pair_record_to_json(const PairRecord& record) {
  return record_json(record).dump(2) + "\n";
}

std::string pair_directory(std::int64_t index) { return fmt::format("pairs/{:06}", index); }

PairRecord write_pair(const fs::path& root, std::int64_t index, const PseudoPair& pair) {
  const std::string dir = pair_directory(index);
  fs::create_directories(root / dir);

  PairRecord r;
  r.index = index;
  r.seed = pair.seed;
  r.step = pair.step;
  r.support_fg_mean = pair.support_means.foreground;
  r.support_bg_means = pair.support_means.background;
  r.query_fg_mean = pair.query_means.foreground;
  r.query_bg_means = pair.query_means.background;
  r.support_polygons = pair.support_polygons;
  r.query_polygons = pair.query_polygons;
  r.hinted_indices = pair.hinted_indices;

  auto put = [&](const std::string& key, const std::string& name,
                 const std::vector<std::uint8_t>& bytes) {
    const std::string rel = dir + "/" + name;
    write_file_atomic(root / rel, bytes.data(), bytes.size());
    r.files[key] = {rel, sha256_hex(bytes)};
  };
  put("support_image", "support.png", encode_png(pair.support_image));
  put("support_mask", "support_mask.png", encode_png(pair.support_mask));
  put("query_image", "query.png", encode_png(pair.query_image));
  put("query_mask", "query_mask.png", encode_png(pair.query_mask));
  const std::string text =
      render_pretrain_instruction(pair, pair.hinted_indices, pair.step.m).text + "\n";
  put("instruction", "pretrain.txt", std::vector<std::uint8_t>(text.begin(), text.end()));
  r.content_digest = content_digest(r.files);

  const std::string meta = pair_record_to_json(r);
  write_file_atomic(root / dir / "meta.json", meta.data(), meta.size());
  return r;
}

DatasetManifest generate_dataset(const GenConfig& config, const fs::path& out_dir, unsigned jobs,
                                 const ProgressFn& progress) {
  config.validate();
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) {
    throw Error(ErrorCode::kIo, "cannot create output directory " + out_dir.string());
  }

  DatasetManifest m;
  m.side = config.size;
  m.schedule = config.schedule;
  m.seed = config.seed;
  m.count = config.count;
  m.sigma = config.sigma;
  m.min_area = config.min_area;
  m.step_policy = config.step_policy;
  m.step = config.step;
  m.pairs.resize(static_cast<std::size_t>(config.count));

  GenerationOptions opts;
  opts.sigma = config.sigma;
  opts.min_area = config.min_area;

  std::atomic<std::int64_t> next{0};
  std::atomic<std::int64_t> done{0};
  std::atomic<bool> stop{false};
  std::mutex mu;
  std::optional<std::pair<std::int64_t, Error>> failure;

  auto worker = [&] {
    while (!stop.load()) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= config.count) return;
      try {
        const StepParams step = step_params(pair_step(config, i), config.schedule);
        const PseudoPair pair = generate_pair(pair_seed(config, i), step, config.size,
                                              config.size, opts);
        m.pairs[static_cast<std::size_t>(i)] = write_pair(out_dir, i, pair);
      } catch (const Error& e) {
        std::lock_guard lock(mu);
        if (!failure || i < failure->first) failure.emplace(i, e);
        stop.store(true);
        return;
      }
      const std::int64_t d = done.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard lock(mu);
        progress(d, config.count);
      }
    }
  };

  const unsigned n_threads =
      static_cast<unsigned>(std::clamp<std::int64_t>(jobs == 0 ? 1 : jobs, 1,
                                                     std::max<std::int64_t>(config.count, 1)));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  if (failure) {
    const auto& [index, e] = *failure;
    const ErrorCode code =
        e.code() == ErrorCode::kIo ? ErrorCode::kIo : ErrorCode::kLayoutGeneration;
    throw Error(code, fmt::format("pair {}: {}", index, e.what()));
  }
  save_manifest(m, out_dir / kManifestFile);
  return m;
}

std::vector<std::string> validate_dataset(const DatasetManifest& m, const fs::path& root) {
  std::vector<std::string> problems;
  if (m.side < kMinLayoutSide || m.side > kCoordVocabulary) {
    problems.push_back(fmt::format("side {} outside [{}, {}]", m.side, kMinLayoutSide,
                                   kCoordVocabulary));
  }
  if (static_cast<std::int64_t>(m.pairs.size()) != m.count) {
    problems.push_back(fmt::format("count {} but {} pair records", m.count, m.pairs.size()));
  }
  static const char* const kKeys[] = {"support_image", "support_mask", "query_image",
                                      "query_mask", "instruction"};
  for (std::size_t i = 0; i < m.pairs.size(); ++i) {
    const PairRecord& r = m.pairs[i];
    const std::string tag = fmt::format("pair {}", i);
    if (r.index != static_cast<std::int64_t>(i)) {
      problems.push_back(fmt::format("{}: record index {} out of order", tag, r.index));
    }
    if (r.support_polygons.empty() || r.query_polygons.empty()) {
      problems.push_back(tag + ": missing polygons");
    }
    for (const auto* set : {&r.support_polygons, &r.query_polygons}) {
      for (const auto& p : *set) {
        for (const auto& v : p.vertices) {
          if (v.x < 0 || v.y < 0 || v.x >= m.side || v.y >= m.side) {
            problems.push_back(fmt::format("{}: vertex ({}, {}) outside the image", tag, v.x,
                                           v.y));
          }
        }
      }
    }
    if (static_cast<int>(r.hinted_indices.size()) != r.step.m) {
      problems.push_back(tag + ": hinted index count differs from M");
    }
    for (const char* key : kKeys) {
      auto it = r.files.find(key);
      if (it == r.files.end()) {
        problems.push_back(fmt::format("{}: no {} file", tag, key));
        continue;
      }
      const fs::path path = root / it->second.path;
      if (!fs::is_regular_file(path)) {
        problems.push_back(fmt::format("{}: missing {}", tag, it->second.path));
      } else if (sha256_file(path) != it->second.sha256) {
        problems.push_back(fmt::format("{}: digest mismatch for {}", tag, it->second.path));
      }
    }
    if (content_digest(r.files) != r.content_digest) {
      problems.push_back(tag + ": content digest mismatch");
    }
  }
  return problems;
}

std::vector<Mask> load_query_objects(const DatasetManifest& manifest, const PairRecord& record,
                                     const fs::path& root) {
  auto it = record.files.find("query_mask");
  if (it == record.files.end()) {
    throw Error(ErrorCode::kValidation,
                fmt::format("pair {}: no query mask file", record.index));
  }
  const Mask mask = read_mask_png(root / it->second.path);
  if (mask.width() != manifest.side || mask.height() != manifest.side) {
    throw Error(ErrorCode::kValidation,
                fmt::format("pair {}: query mask is {}x{}", record.index, mask.width(),
                            mask.height()));
  }
  return component_masks(mask, manifest.min_area);
}

}  // namespace llafs
