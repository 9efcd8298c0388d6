#include "bitefuse/splits.hpp"

#include <algorithm>
#include <unordered_set>

#include <json.hpp>

#include "bitefuse/errors.hpp"
#include "bitefuse/rng.hpp"

namespace bitefuse {

std::vector<std::vector<std::string>> FoldAssignment::folds() const {
  std::vector<std::vector<std::string>> out(k);
  for (const auto& [id, fold] : fold_of) out[fold].push_back(id);
  return out;  // map iteration is already sorted by id
}

namespace {

void shuffle_ids(std::vector<std::string>& ids, std::uint64_t seed) {
  Rng rng(seed);
  for (std::size_t i = ids.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(ids[i - 1], ids[j]);
  }
}

void check_fold_args(std::size_t n, int k) {
  if (k < 2) throw ConfigError("make_folds: k must be >= 2");
  if (n < static_cast<std::size_t>(k)) {
    throw ValidationError("make_folds: fewer ids than folds");
  }
}

}  // namespace

FoldAssignment make_folds(const std::vector<std::string>& image_ids, int k,
                          std::uint64_t seed) {
  check_fold_args(image_ids.size(), k);
  std::unordered_set<std::string> seen;
  for (const std::string& id : image_ids) {
    if (!seen.insert(id).second) {
      throw ValidationError("make_folds: duplicate id \"" + id + "\"");
    }
  }

  std::vector<std::string> ids = image_ids;
  shuffle_ids(ids, seed);

  FoldAssignment out;
  out.k = k;
  out.seed = seed;
  for (std::size_t j = 0; j < ids.size(); ++j) {
    out.fold_of.emplace(std::move(ids[j]), static_cast<int>(j % k));
  }
  return out;
}

FoldAssignment make_folds_by_patient(const std::vector<std::string>& image_ids,
                                     const std::map<std::string, std::string>& patient_of,
                                     int k, std::uint64_t seed) {
  check_fold_args(image_ids.size(), k);

  // group ids by patient, preserving first-appearance order of patients
  std::vector<std::pair<std::string, std::vector<std::string>>> patients;
  std::map<std::string, std::size_t> index;
  for (const std::string& id : image_ids) {
    const auto pit = patient_of.find(id);
    const std::string patient = pit == patient_of.end() ? "image:" + id : pit->second;
    const auto it = index.find(patient);
    if (it == index.end()) {
      index.emplace(patient, patients.size());
      patients.push_back({patient, {id}});
    } else {
      patients[it->second].second.push_back(id);
    }
  }
  if (patients.size() < static_cast<std::size_t>(k)) {
    throw ValidationError("make_folds: fewer patients than folds");
  }

  std::vector<std::string> keys;
  keys.reserve(patients.size());
  for (const auto& [key, ids] : patients) keys.push_back(key);
  shuffle_ids(keys, seed);

  FoldAssignment out;
  out.k = k;
  out.seed = seed;
  std::map<std::string, std::vector<std::string>> by_key;
  for (auto& [key, ids] : patients) by_key.emplace(key, std::move(ids));
  for (std::size_t j = 0; j < keys.size(); ++j) {
    for (std::string& id : by_key.at(keys[j])) {
      if (!out.fold_of.emplace(std::move(id), static_cast<int>(j % k)).second) {
        throw ValidationError("make_folds: duplicate id in patient grouping");
      }
    }
  }
  return out;
}

Rotation rotation(const FoldAssignment& assignment, int iteration) {
  if (iteration < 0 || iteration >= assignment.k) {
    throw ConfigError("rotation: iteration out of range [0," +
                      std::to_string(assignment.k) + ")");
  }
  Rotation rot;
  rot.test_fold = iteration;
  rot.validation_fold = (iteration + 1) % assignment.k;
  for (int f = 0; f < assignment.k; ++f) {
    if (f != rot.test_fold && f != rot.validation_fold) rot.train_folds.push_back(f);
  }
  return rot;
}

std::string folds_to_json(const FoldAssignment& assignment) {
  nlohmann::ordered_json doc;
  doc["k"] = assignment.k;
  doc["seed"] = assignment.seed;
  doc["assignment"] = nlohmann::ordered_json::object();
  for (const auto& [id, fold] : assignment.fold_of) doc["assignment"][id] = fold;
  return doc.dump(2) + "\n";
}

FoldAssignment folds_from_json(const std::string& text, const std::string& context) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(context + ": " + e.what());
  }
  FoldAssignment out;
  try {
    out.k = doc.at("k").get<int>();
    out.seed = doc.at("seed").get<std::uint64_t>();
    for (const auto& [id, fold] : doc.at("assignment").items()) {
      out.fold_of.emplace(id, fold.get<int>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(context + ": " + e.what());
  }
  for (const auto& [id, fold] : out.fold_of) {
    if (fold < 0 || fold >= out.k) {
      throw ValidationError(context + ": fold index out of range for \"" + id + "\"");
    }
  }
  return out;
}

}  // namespace bitefuse
