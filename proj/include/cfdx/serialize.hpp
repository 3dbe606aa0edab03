#pragma once

#include <optional>

#include <nlohmann/json.hpp>

#include "cfdx/backend.hpp"
#include "cfdx/cf_engine.hpp"
#include "cfdx/error.hpp"
#include "cfdx/parsing.hpp"

namespace nlohmann {

template <typename T>
struct adl_serializer<std::optional<T>> {
  static void to_json(json& j, const std::optional<T>& value) {
    if (value) {
      j = *value;
    } else {
      j = nullptr;
    }
  }
  static void from_json(const json& j, std::optional<T>& value) {
    if (j.is_null()) {
      value.reset();
    } else {
      value = j.get<T>();
    }
  }
};

}  // namespace nlohmann

namespace cfdx {

using nlohmann::json;

void to_json(json& j, const Warning& w);
void from_json(const json& j, Warning& w);

void to_json(json& j, const ChatMessage& m);
void from_json(const json& j, ChatMessage& m);
void to_json(json& j, const TokenLogprob& t);
void from_json(const json& j, TokenLogprob& t);
void to_json(json& j, const Usage& u);
void from_json(const json& j, Usage& u);
void to_json(json& j, const ChatResponse& r);
void from_json(const json& j, ChatResponse& r);

void to_json(json& j, const RoutedQuestion& q);
void from_json(const json& j, RoutedQuestion& q);
void to_json(json& j, const RoutedAnswer& a);
void from_json(const json& j, RoutedAnswer& a);
void to_json(json& j, const DdxEntry& e);
void from_json(const json& j, DdxEntry& e);
void to_json(json& j, const DifferentialSet& d);
void from_json(const json& j, DifferentialSet& d);
void to_json(json& j, const SpecialistAssignment& s);
void to_json(json& j, const JudgePayload& p);
void from_json(const json& j, JudgePayload& p);

void to_json(json& j, const EvidenceSpan& s);
void from_json(const json& j, EvidenceSpan& s);
void to_json(json& j, const EvidenceGroup& g);
void from_json(const json& j, EvidenceGroup& g);
void to_json(json& j, const ProbedDiagnosis& p);
void from_json(const json& j, ProbedDiagnosis& p);
void to_json(json& j, const CounterfactualVariant& v);
void from_json(const json& j, CounterfactualVariant& v);

}  // namespace cfdx
