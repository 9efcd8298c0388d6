#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace bitefuse {

struct FoldAssignment {
  int k = 0;
  std::uint64_t seed = 0;
  std::map<std::string, int> fold_of;

  std::vector<std::vector<std::string>> folds() const;  // ids per fold, sorted
};

// Seeded Fisher-Yates shuffle, then round-robin dealing: the j-th shuffled
// id lands in fold j % k. Fold sizes differ by at most one.
FoldAssignment make_folds(const std::vector<std::string>& image_ids, int k,
                          std::uint64_t seed);

struct Rotation {
  std::vector<int> train_folds;
  int validation_fold = 0;
  int test_fold = 0;
};

// Iteration i: test = fold i, validation = fold (i+1) mod k, train = rest.
Rotation rotation(const FoldAssignment& assignment, int iteration);

// Optional grouping: every id of a patient goes to that patient's fold.
// patient_of maps image id -> patient id; ids absent from the map are
// treated as singleton patients.
FoldAssignment make_folds_by_patient(const std::vector<std::string>& image_ids,
                                     const std::map<std::string, std::string>& patient_of,
                                     int k, std::uint64_t seed);

std::string folds_to_json(const FoldAssignment& assignment);
FoldAssignment folds_from_json(const std::string& text, const std::string& context);

}  // namespace bitefuse
