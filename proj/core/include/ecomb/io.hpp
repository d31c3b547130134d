#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecomb/comb.hpp"
#include "ecomb/lab_config.hpp"
#include "ecomb/lattice.hpp"

namespace ecomb {

inline constexpr int dataset_schema_version = 1;

std::string library_version();

// %.17g, enough digits to round-trip doubles exactly.
std::string format_double(double v);

// Columnar spectrum text: header comments, then one row per sideband with
// ell, Re alpha, Im alpha, |alpha|^2.
void write_spectrum(std::ostream& os, const SidebandSpectrum& s);
void write_spectrum_file(const std::string& path, const SidebandSpectrum& s);
SidebandSpectrum read_spectrum(std::istream& is);
SidebandSpectrum read_spectrum_file(const std::string& path);

// Numeric table emitted both as CSV and as a structured-record document.
struct Dataset {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  nlohmann::json meta; // resolved parameters the rows were computed from
};

void write_dataset_csv(const std::string& path, const Dataset& ds);
void write_dataset_records(const std::string& path, const Dataset& ds);
Dataset read_dataset_records(const std::string& path);

// One row per recorded slice: position, absolute per-ell resonant
// probabilities, resonant and nonresonant weights, sideband sigma.
Dataset trajectory_dataset(const EvolveResult& run, const std::string& name);

struct ManifestOutput {
  std::string file; // relative to the manifest location
  std::uint64_t bytes = 0;
  std::string fnv1a64;
};

// Everything needed to reproduce a run byte for byte: the resolved
// configuration plus size and hash of each emitted file.
struct RunManifest {
  std::string command;
  nlohmann::json config;
  std::vector<ManifestOutput> outputs;
};

void write_manifest(const std::string& path, RunManifest manifest);
RunManifest read_manifest(const std::string& path);
std::uint64_t fnv1a64_file(const std::string& path);

void to_json(nlohmann::json& j, const DimensionlessProblem& p);
void from_json(const nlohmann::json& j, DimensionlessProblem& p);

// Lab configs serialize with keV kinetic energies, eV photon energies, and
// kW powers.
void to_json(nlohmann::json& j, const LabConfig& lab);
void from_json(const nlohmann::json& j, LabConfig& lab);

} // namespace ecomb
