#pragma once

#include "missinfo/bayes_measures.hpp"
#include "missinfo/diagnostics.hpp"
#include "missinfo/large_sample.hpp"

#include <string>

namespace missinfo {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kReportSchema = "missinfo.report/1";
inline constexpr const char* kManifestSchema = "missinfo.manifest/1";

// "fnv1a64:" + 16 hex digits over the compact dump of the document.
std::string manifest_hash(const json& doc);

json to_json(const FitResult& fit);
json to_json(const RiValue& v);
json to_json(const LargeSampleReport& r);
json to_json(const CompletedRatio& r);
json to_json(const BayesValue& v);
json to_json(const BayesFactorReport& r);
json to_json(const ShrinkTable& t);
json to_json(const ExpansionCheck& e);
json to_json(const EmIdentityReport& r);
json to_json(const TiltingBi0& t);

// NaN and infinities have no JSON spelling; they are written as null.
json number(double x);

}  // namespace missinfo
