#pragma once

#include <json.hpp>

#include "dimminer/dimension.hpp"
#include "dimminer/eval.hpp"
#include "dimminer/feedback.hpp"

namespace dimminer {

inline constexpr int kSessionSchemaVersion = 1;

void to_json(nlohmann::json& j, const FeatureList& list);
void from_json(const nlohmann::json& j, FeatureList& list);
// {eig_index, top_ids, bottom_ids, list_c1: [[term, weight]...], list_c2, ...}
void to_json(nlohmann::json& j, const DimensionProfile& p);
void from_json(const nlohmann::json& j, DimensionProfile& p);
void to_json(nlohmann::json& j, const MetricReport& r);
void from_json(const nlohmann::json& j, MetricReport& r);
void to_json(nlohmann::json& j, const SelectionScore& s);
void from_json(const nlohmann::json& j, SelectionScore& s);
void to_json(nlohmann::json& j, const PolarityMap& m);
void from_json(const nlohmann::json& j, PolarityMap& m);
void to_json(nlohmann::json& j, const SessionSettings& s);
void from_json(const nlohmann::json& j, SessionSettings& s);
void to_json(nlohmann::json& j, const SelectionResult& r);
void from_json(const nlohmann::json& j, SelectionResult& r);
void to_json(nlohmann::json& j, const SelectionAttempt& a);
void from_json(const nlohmann::json& j, SelectionAttempt& a);
// Carries "v"; selection/polarity_map/result mirror the newest attempt.
void to_json(nlohmann::json& j, const FeedbackSession& s);
void from_json(const nlohmann::json& j, FeedbackSession& s);

}  // namespace dimminer
