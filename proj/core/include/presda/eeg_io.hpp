#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "presda/eeg_record.hpp"

namespace presda::eeg {

// On-disk formats
//   <name>.eegr : one JSON header line
//                 {channel_names, fs_hz, ga_weeks, n_samples, record_id}
//                 followed by n_channels*n_samples little-endian float32,
//                 channel-major.
//   annotations : CSV with header "onset_s,offset_s", one event per row.
//   manifest    : JSON array of {record, annotations, ga_weeks, split};
//                 paths are resolved relative to the manifest file.

EegRecord load_record(const std::filesystem::path& path);
void save_record(const EegRecord& record, const std::filesystem::path& path);

AnnotationSet load_annotations(
    const std::filesystem::path& path,
    AnnotationSet::OverlapPolicy policy = AnnotationSet::OverlapPolicy::Merge);
void save_annotations(const AnnotationSet& annotations,
                      const std::filesystem::path& path);

// Record plus its annotation file, cross-validated against record duration.
EegRecord load_record_with_annotations(const std::filesystem::path& record_path,
                                       const std::filesystem::path& annotation_path);

struct ManifestEntry {
    std::string record_path;      // as written in the manifest
    std::string annotation_path;  // empty means "no seizures annotated"
    double ga_weeks = 0.0;
    std::string split;  // train | val | test
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    std::filesystem::path base_dir;  // directory the manifest was loaded from

    std::filesystem::path resolve(const std::string& p) const;
    std::vector<const ManifestEntry*> split(const std::string& tag) const;
};

DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& manifest,
                   const std::filesystem::path& path);

struct ManifestIssue {
    std::size_t entry_index = 0;
    std::string path;
    std::string reason;
};

struct ManifestReport {
    std::vector<ManifestIssue> failures;
    std::size_t entries_checked = 0;
    bool ok() const { return failures.empty(); }
};

// Report-only: checks that files resolve and load, record invariants hold,
// annotations fit inside the record, ids are unique, and that every split in
// required_splits is non-empty.
ManifestReport validate_manifest(const DatasetManifest& manifest,
                                 const std::vector<std::string>& required_splits = {});

}  // namespace presda::eeg
