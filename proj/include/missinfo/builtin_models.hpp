#pragma once

#include "missinfo/model_api.hpp"
#include "missinfo/models/bernoulli.hpp"
#include "missinfo/models/entropy.hpp"
#include "missinfo/models/haplotype.hpp"
#include "missinfo/models/normal_mean.hpp"
#include "missinfo/models/tilting.hpp"
#include "missinfo/models/two_sample.hpp"

#include <memory>
#include <string>
#include <vector>

namespace missinfo {

// Tags: bernoulli_mcar, two_sample_counts, normal_mean {known_variance},
// tilting {theta_max}, haplotype_cc {interest, reference}.
std::unique_ptr<IncompleteModel> make_model(const std::string& tag, const json& options = json::object());
std::vector<std::string> model_tags();

// Dataset document: {"schema": "missinfo.dataset/1", "model": tag,
// "units": [...], "weights": [...]}; weights default to 1.
UnitDataset load_dataset(const json& doc, const IncompleteModel& model);
json dataset_to_json(const UnitDataset& data, const IncompleteModel& model);

struct DatasetViolations {
    std::vector<std::string> dataset;                           // document-level problems
    std::vector<std::pair<std::size_t, std::string>> units;     // (unit index, problem)
    bool ok() const { return dataset.empty() && units.empty(); }
};
DatasetViolations check_dataset(const json& doc, const IncompleteModel& model);

json read_json_file(const std::string& path);

}  // namespace missinfo
