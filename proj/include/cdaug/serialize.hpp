#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cdaug/data.hpp"
#include "cdaug/types.hpp"

namespace cdaug {

// Canonical text serialization. Every document is a JSON envelope
//   { "kind": "<type tag>", "payload": {...}, "schema_version": 1 }
// with sorted keys and 2-space indentation, so output bytes are a pure
// function of the value. Numbers round-trip exactly. Schemas are documented
// under docs/schemas/.

inline constexpr int kSchemaVersion = 1;

std::string to_text(const Window& w);
std::string to_text(const LabeledWindow& lw);
std::string to_text(const Dataset& d);
std::string to_text(const TransformSpec& spec);
std::string to_text(const NormStats& stats);
std::string to_text(const ReferenceModel& m);
std::string to_text(const ModelArtifact& a);
std::string to_text(const VoteRecord& v);
std::string to_text(const Explanation& e);
std::string to_text(const SyntheticSpec& spec);
std::string to_text(const CorpusManifest& manifest);

Window window_from_text(const std::string& text);
LabeledWindow labeled_window_from_text(const std::string& text);
Dataset dataset_from_text(const std::string& text);
TransformSpec transform_spec_from_text(const std::string& text);
NormStats norm_stats_from_text(const std::string& text);
ReferenceModel reference_model_from_text(const std::string& text);
ModelArtifact artifact_from_text(const std::string& text);
VoteRecord vote_record_from_text(const std::string& text);
Explanation explanation_from_text(const std::string& text);
SyntheticSpec synthetic_spec_from_text(const std::string& text);
CorpusManifest manifest_from_text(const std::string& text);

// One prediction per line: {"index":i,"truth":t,"vote":{...}} in compact
// JSON. `truth` is -1 when no label is known.
struct VoteRow {
    std::size_t index = 0;
    int truth = -1;
    VoteRecord vote;

    bool operator==(const VoteRow&) const = default;
};

std::string vote_row_to_line(const VoteRow& row);
VoteRow vote_row_from_line(const std::string& line);

// Plain file helpers; IoError on failure.
void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

} // namespace cdaug
