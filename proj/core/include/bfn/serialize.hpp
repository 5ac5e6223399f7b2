#ifndef BFN_SERIALIZE_HPP
#define BFN_SERIALIZE_HPP

#include <json.hpp>

#include "bfn/bfn.hpp"
#include "bfn/data.hpp"
#include "bfn/model.hpp"
#include "bfn/schedule.hpp"

// JSON forms shared by the checkpoint manifest and the experiment config.
namespace bfn {

using json = nlohmann::json;

void to_json(json& j, const AccuracySchedule& s);
void from_json(const json& j, AccuracySchedule& s);

void to_json(json& j, const NetworkSpec& s);
void from_json(const json& j, NetworkSpec& s);

void to_json(json& j, const Variable& v);
void from_json(const json& j, Variable& v);

void to_json(json& j, const DataSchema& s);
void from_json(const json& j, DataSchema& s);

void to_json(json& j, const ColumnCodec& c);
void from_json(const json& j, ColumnCodec& c);

}  // namespace bfn

#endif
