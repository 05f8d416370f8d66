#include "llafs/tablegen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <json.hpp>

#include "llafs/error.hpp"
#include "llafs/expert.hpp"
#include "llafs/random.hpp"

namespace llafs {

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::kShape, "cosine: dimension " + std::to_string(u.size()) + " vs " +
                                       std::to_string(v.size()));
  }
  double dot = 0.0;
  double nu = 0.0;
  double nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) throw Error(ErrorCode::kDegenerateVector, "cosine of a zero vector");
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

Embedding normalized(Embedding v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  if (n == 0.0) throw Error(ErrorCode::kDegenerateVector, "cannot normalise a zero vector");
  n = std::sqrt(n);
  for (double& x : v) x /= n;
  return v;
}

std::string_view to_string(Resolution r) noexcept {
  return r == Resolution::kResolved ? "resolved" : "unresolved";
}

const TableRow* CorrespondingTable::find(std::string_view region_id) const noexcept {
  for (const auto& row : rows) {
    if (row.region_id == region_id) return &row;
  }
  return nullptr;
}

namespace {

void check_unit(std::span<const double> v, std::string_view what) {
  double n = 0.0;
  for (double x : v) n += x * x;
  if (std::abs(std::sqrt(n) - 1.0) > kUnitNormTolerance) {
    throw Error(ErrorCode::kDegenerateVector,
                std::string(what) + " embedding is not unit-normalised");
  }
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

CorrespondingTable build_table(std::span<const Region> regions,
                               std::span<const Attribute> attributes, double alpha) {
  if (!(alpha > -1.0 && alpha < 1.0)) {
    throw Error(ErrorCode::kParameter, "alpha must lie in (-1, 1)");
  }
  std::size_t dim = 0;
  bool have_dim = false;
  auto check_dim = [&](std::size_t d, std::string_view who) {
    if (!have_dim) {
      dim = d;
      have_dim = true;
    } else if (d != dim) {
      throw Error(ErrorCode::kShape, std::string(who) + " embedding has dimension " +
                                         std::to_string(d) + ", expected " + std::to_string(dim));
    }
  };
  for (const auto& r : regions) {
    check_dim(r.embedding.size(), "region '" + r.id + "'");
    check_unit(r.embedding, "region '" + r.id + "'");
  }
  for (const auto& a : attributes) {
    if (a.text.empty()) throw Error(ErrorCode::kParameter, "attribute text is empty");
    check_dim(a.embedding.size(), "attribute '" + a.text + "'");
    check_unit(a.embedding, "attribute '" + a.text + "'");
  }

  CorrespondingTable table;
  table.alpha = alpha;
  table.rows.reserve(regions.size());
  for (const auto& r : regions) {
    TableRow row{r.id, {}};
    for (const auto& a : attributes) {
      if (cosine(r.embedding, a.embedding) > alpha) row.attributes.push_back(a.text);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::vector<std::string> matched_attributes(const CorrespondingTable& table) {
  std::vector<std::string> out;
  for (const auto& row : table.rows) {
    for (const auto& a : row.attributes) {
      if (std::find(out.begin(), out.end(), a) == out.end()) out.push_back(a);
    }
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view text, std::uint64_t basis) noexcept {
  std::uint64_t h = basis;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

HashEmbedder::HashEmbedder(std::size_t dimension, std::uint64_t salt)
    : dimension_(dimension), salt_(salt) {
  if (dimension == 0) throw Error(ErrorCode::kParameter, "embedding dimension must be positive");
}

Embedding HashEmbedder::draw(std::uint64_t seed) const {
  Rng rng(split_seed(seed, salt_));
  Embedding v(dimension_);
  for (double& x : v) x = rng.normal();
  return normalized(std::move(v));
}

Embedding HashEmbedder::embed_region(std::string_view descriptor) const {
  return draw(fnv1a64(descriptor, fnv1a64("region:")));
}

Embedding HashEmbedder::embed_text(std::string_view phrase) const {
  return draw(fnv1a64(phrase, fnv1a64("text:")));
}

std::string attribute_prompt(std::string_view phrase) {
  return "A photo of " + std::string(phrase);
}

std::vector<Attribute> embed_attributes(std::span<const std::string> phrases,
                                        const Embedder& embedder) {
  std::vector<Attribute> out;
  out.reserve(phrases.size());
  for (const auto& p : phrases) out.push_back({p, embedder.embed_text(attribute_prompt(p))});
  return out;
}

RefinedTable refine_table(std::string_view category, std::span<const Region> regions,
                          std::span<const Attribute> attributes, const Embedder& embedder,
                          ExpertOracle& oracle, double alpha, int max_iterations) {
  if (regions.empty()) throw Error(ErrorCode::kParameter, "refine_table: no regions");
  if (attributes.empty()) throw Error(ErrorCode::kParameter, "refine_table: no attributes");
  if (max_iterations < 0) throw Error(ErrorCode::kParameter, "max_iterations must be >= 0");

  RefinedTable out;
  out.attributes.assign(attributes.begin(), attributes.end());
  out.table = build_table(regions, out.attributes, alpha);
  Provenance prov;

  const std::vector<std::string> partial = matched_attributes(out.table);
  const std::vector<std::string> classes = oracle.detect_ambiguity(category, partial);
  prov.transcript.push_back(
      {"ambiguity", ambiguity_prompt(category, partial), render_ambiguity_answer(classes)});
  if (classes.empty()) {
    prov.status = Resolution::kResolved;
  } else {
    prov.ambiguous_classes = classes;
    prov.status = Resolution::kUnresolved;
    std::vector<std::string> known;
    for (const auto& a : out.attributes) known.push_back(lower(a.text));

    for (int round = 1; round <= max_iterations; ++round) {
      const std::string prompt =
          prov.discriminative_attributes.empty()
              ? discriminate_prompt(category, classes)
              : discriminate_followup_prompt(category, classes, prov.discriminative_attributes);
      const std::vector<std::string> answer =
          oracle.discriminate(category, classes, prov.discriminative_attributes);
      prov.transcript.push_back(
          {"discriminate", prompt, render_discriminative_answer(category, answer)});

      std::vector<std::string> fresh;
      for (const auto& a : answer) {
        const std::string key = lower(a);
        if (a.empty() || std::find(known.begin(), known.end(), key) != known.end()) continue;
        known.push_back(key);
        fresh.push_back(a);
      }
      for (auto& att : embed_attributes(fresh, embedder)) out.attributes.push_back(std::move(att));
      prov.discriminative_attributes.insert(prov.discriminative_attributes.end(), fresh.begin(),
                                            fresh.end());
      out.table = build_table(regions, out.attributes, alpha);
      prov.iterations = round;

      const bool matched = std::any_of(fresh.begin(), fresh.end(), [&](const std::string& f) {
        return std::any_of(out.table.rows.begin(), out.table.rows.end(), [&](const TableRow& r) {
          return std::find(r.attributes.begin(), r.attributes.end(), f) != r.attributes.end();
        });
      });
      if (matched) {
        prov.status = Resolution::kResolved;
        break;
      }
    }
  }
  out.table.category = std::string(category);
  out.table.provenance = std::move(prov);
  return out;
}

std::string table_to_json(const CorrespondingTable& table) {
  nlohmann::ordered_json j;
  j["category"] = table.category;
  j["alpha"] = table.alpha;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"region", r.region_id}, {"attributes", r.attributes}});
  }
  j["rows"] = std::move(rows);
  const auto& p = table.provenance;
  nlohmann::ordered_json transcript = nlohmann::ordered_json::array();
  for (const auto& e : p.transcript) {
    transcript.push_back({{"kind", e.kind}, {"prompt", e.prompt}, {"response", e.response}});
  }
  j["provenance"] = {{"iterations", p.iterations},
                     {"status", std::string(to_string(p.status))},
                     {"ambiguous_classes", p.ambiguous_classes},
                     {"discriminative_attributes", p.discriminative_attributes},
                     {"transcript", std::move(transcript)}};
  return j.dump(2);
}

CorrespondingTable table_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    CorrespondingTable t;
    t.category = j.at("category").get<std::string>();
    t.alpha = j.at("alpha").get<double>();
    for (const auto& r : j.at("rows")) {
      t.rows.push_back({r.at("region").get<std::string>(),
                        r.at("attributes").get<std::vector<std::string>>()});
    }
    if (j.contains("provenance")) {
      const auto& p = j.at("provenance");
      t.provenance.iterations = p.value("iterations", 0);
      t.provenance.status =
          p.value("status", std::string("resolved")) == "unresolved" ? Resolution::kUnresolved
                                                                     : Resolution::kResolved;
      t.provenance.ambiguous_classes =
          p.value("ambiguous_classes", std::vector<std::string>{});
      t.provenance.discriminative_attributes =
          p.value("discriminative_attributes", std::vector<std::string>{});
      if (p.contains("transcript")) {
        for (const auto& e : p.at("transcript")) {
          t.provenance.transcript.push_back({e.at("kind").get<std::string>(),
                                             e.at("prompt").get<std::string>(),
                                             e.at("response").get<std::string>()});
        }
      }
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kValidation, std::string("table record: ") + e.what());
  }
}

}  // namespace llafs
