#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "qfilm/pipeline.hpp"

namespace qfilm {

inline constexpr const char* kSchemaVersion = "1.0";

using Json = nlohmann::ordered_json;

// Complex numbers are written as [re, im]; matrices as row-major nested arrays.
Json as_json(Complex z);
Json as_json(const CMat3& m);
Json as_json(const CMat4& m);
Json as_json(const QutritState& s);

// Full run report. `files` maps sidecar roles to file names relative to the report.
Json as_json(const RunResult& result, const Json& files = Json::object());

// Serialization with the timestamp removed; two runs with the same config
// and seed produce identical canonical strings.
std::string canonical_json(Json report);

// Writes report.json, the CSV sidecars and one bundle_<pump>.json per pump
// into `dir` (created if needed). Returns the report.
Json write_run(const RunResult& result, const std::filesystem::path& dir);

// CSV sidecars.
void write_histogram_csv(const TimeTagHistogram& h, const std::filesystem::path& path);
void write_fringe_csv(const std::vector<FringeResult>& fringes, const std::filesystem::path& path);
void write_hom_csv(const std::vector<HomPoint>& curve, const std::filesystem::path& path);
void write_spectrum_csv(const SpectralAmplitude& spectrum, const std::filesystem::path& path);
void write_delay_csv(const DelayLineResult& result, const std::filesystem::path& path);

// Tomography bundle: the protocol's wave-plate settings plus the records.
struct TomographyBundle {
  TomographyProtocol protocol = TomographyProtocol::default_nine();
  std::vector<CoincidenceRecord> records;
};

Json bundle_to_json(const TomographyBundle& bundle);
// Throws ConfigError on malformed input.
TomographyBundle bundle_from_json(const Json& j);
TomographyBundle read_bundle(const std::filesystem::path& path);

// Record CSV with header qwp_a,hwp_a,qwp_b,hwp_b,raw,accidental,duration;
// each row defines one setting. Throws ConfigError.
TomographyBundle read_records_csv(const std::filesystem::path& path);

Json reconstruction_to_json(const Reconstruction& r);

}  // namespace qfilm
