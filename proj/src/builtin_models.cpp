#include "missinfo/builtin_models.hpp"

#include <fstream>
#include <sstream>

namespace missinfo {

std::vector<std::string> model_tags() {
    return {"bernoulli_mcar", "two_sample_counts", "normal_mean", "tilting", "haplotype_cc"};
}

std::unique_ptr<IncompleteModel> make_model(const std::string& tag, const json& options) {
    const json opt = options.is_null() ? json::object() : options;
    if (!opt.is_object()) throw ValidationError("model options must be a JSON object");
    if (tag == "bernoulli_mcar") return std::make_unique<BernoulliMcarModel>();
    if (tag == "two_sample_counts") return std::make_unique<TwoSampleCountsModel>();
    if (tag == "normal_mean") {
        std::optional<double> known;
        if (opt.contains("known_variance") && !opt["known_variance"].is_null())
            known = opt["known_variance"].get<double>();
        return std::make_unique<NormalMeanModel>(known);
    }
    if (tag == "tilting") return std::make_unique<TiltingModel>(opt.value("theta_max", 20.0));
    if (tag == "haplotype_cc")
        return std::make_unique<HaplotypeCCModel>(haplotype_from_name(opt.value("interest", "TX")),
                                                  haplotype_from_name(opt.value("reference", "C0")));
    std::string known;
    for (auto& t : model_tags()) known += (known.empty() ? "" : ", ") + t;
    throw ValidationError("unknown model tag \"" + tag + "\" (known: " + known + ")");
}

DatasetViolations check_dataset(const json& doc, const IncompleteModel& model) {
    DatasetViolations v;
    if (!doc.is_object()) {
        v.dataset.push_back("dataset is not a JSON object");
        return v;
    }
    if (doc.contains("schema") && doc["schema"] != "missinfo.dataset/1")
        v.dataset.push_back("schema must be \"missinfo.dataset/1\"");
    if (!doc.contains("model") || !doc["model"].is_string())
        v.dataset.push_back("missing \"model\" tag");
    else if (doc["model"] != model.tag())
        v.dataset.push_back("dataset is for model \"" + doc["model"].get<std::string>() +
                            "\" but model \"" + model.tag() + "\" was requested");
    if (!doc.contains("units") || !doc["units"].is_array()) {
        v.dataset.push_back("\"units\" must be an array");
        return v;
    }
    const auto& units = doc["units"];
    std::vector<double> w(units.size(), 1.0);
    if (doc.contains("weights")) {
        const auto& jw = doc["weights"];
        if (!jw.is_array() || jw.size() != units.size()) {
            v.dataset.push_back("\"weights\" must be an array with one entry per unit");
        } else {
            bool positive = false;
            for (std::size_t i = 0; i < jw.size(); ++i) {
                if (!jw[i].is_number()) {
                    v.units.emplace_back(i, "weight is not a number");
                    continue;
                }
                w[i] = jw[i].get<double>();
                if (!(w[i] >= 0.0) || !std::isfinite(w[i])) v.units.emplace_back(i, "weight is negative or not finite");
                else if (w[i] != 1.0 && model.tag() != "tilting")
                    v.units.emplace_back(i, "weights other than 1 are only used by the tilting model (family weight gamma)");
                positive = positive || w[i] > 0.0;
            }
            if (!units.empty() && !positive) v.dataset.push_back("all weights are zero");
        }
    }
    for (std::size_t i = 0; i < units.size(); ++i)
        for (auto& msg : model.check_unit(units[i], w[i])) v.units.emplace_back(i, msg);
    return v;
}

UnitDataset load_dataset(const json& doc, const IncompleteModel& model) {
    auto v = check_dataset(doc, model);
    if (!v.ok()) {
        std::ostringstream os;
        os << "invalid dataset:";
        for (auto& m : v.dataset) os << " " << m << ";";
        for (auto& [i, m] : v.units) os << " unit " << i << ": " << m << ";";
        throw ValidationError(os.str());
    }
    UnitDataset d;
    const auto& units = doc["units"];
    for (std::size_t i = 0; i < units.size(); ++i) {
        double w = doc.contains("weights") ? doc["weights"][i].get<double>() : 1.0;
        d.units.push_back(model.parse_unit(units[i], w));
        d.weights.push_back(w);
    }
    d.validate();
    return d;
}

json dataset_to_json(const UnitDataset& data, const IncompleteModel& model) {
    json units = json::array();
    for (auto& u : data.units) units.push_back(model.unit_to_json(*u));
    return {{"schema", "missinfo.dataset/1"}, {"model", model.tag()}, {"units", units}, {"weights", data.weights}};
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        // byte offset to line number
        std::ifstream again(path);
        std::string text((std::istreambuf_iterator<char>(again)), std::istreambuf_iterator<char>());
        std::size_t line = 1;
        for (std::size_t i = 0; i < std::min<std::size_t>(e.byte, text.size()); ++i) line += text[i] == '\n';
        throw ValidationError(path + ":" + std::to_string(line) + ": JSON parse error: " + e.what());
    }
}

}  // namespace missinfo
