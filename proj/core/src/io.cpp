#include "ecomb/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "ecomb/errors.hpp"

namespace ecomb {

namespace fs = std::filesystem;
using nlohmann::json;

std::string library_version() { return "0.1.0"; }

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + " for writing");
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path + " for reading");
  return is;
}

json load_json(const std::string& path) {
  auto is = open_in(path);
  json j;
  try {
    is >> j;
  } catch (const json::parse_error& e) {
    throw IoError("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

json complex_to_json(const std::complex<double>& z) { return json::array({z.real(), z.imag()}); }

std::complex<double> complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw IoError("expected [re, im] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

} // namespace

void write_spectrum(std::ostream& os, const SidebandSpectrum& s) {
  os << "# sideband-spectrum schema " << dataset_schema_version << "\n";
  os << "# ell_max " << s.ell_max << "\n";
  os << "# raw_weight " << format_double(s.raw_weight) << "\n";
  os << "# provenance " << s.provenance << "\n";
  os << "# columns ell re_amp im_amp prob\n";
  for (int ell = -s.ell_max; ell <= s.ell_max; ++ell) {
    const auto a = s.at(ell);
    os << ell << ' ' << format_double(a.real()) << ' ' << format_double(a.imag()) << ' '
       << format_double(std::norm(a)) << "\n";
  }
}

void write_spectrum_file(const std::string& path, const SidebandSpectrum& s) {
  auto os = open_out(path);
  write_spectrum(os, s);
  if (!os) throw IoError("write failed for " + path);
}

SidebandSpectrum read_spectrum(std::istream& is) {
  int ell_max = -1;
  double raw_weight = 1.0;
  std::string provenance = "file";
  std::vector<std::pair<int, std::complex<double>>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string key;
      ls >> key;
      if (key == "ell_max") ls >> ell_max;
      else if (key == "raw_weight") ls >> raw_weight;
      else if (key == "provenance") ls >> provenance;
      continue;
    }
    std::istringstream ls(line);
    int ell = 0;
    double re = 0.0, im = 0.0, prob = 0.0;
    if (!(ls >> ell >> re >> im >> prob)) throw IoError("bad spectrum row: " + line);
    rows.emplace_back(ell, std::complex<double>(re, im));
  }
  if (rows.empty()) throw IoError("spectrum file holds no rows");
  if (ell_max < 0) ell_max = (static_cast<int>(rows.size()) - 1) / 2;
  if (rows.size() != static_cast<std::size_t>(2 * ell_max + 1)) {
    throw IoError("spectrum row count does not match ell_max");
  }
  SidebandSpectrum s = SidebandSpectrum::zeros(ell_max);
  s.raw_weight = raw_weight;
  s.provenance = provenance;
  for (const auto& [ell, amp] : rows) {
    if (std::abs(ell) > ell_max) throw IoError("spectrum row outside ell range");
    s.at(ell) = amp;
  }
  return s;
}

SidebandSpectrum read_spectrum_file(const std::string& path) {
  auto is = open_in(path);
  return read_spectrum(is);
}

void write_dataset_csv(const std::string& path, const Dataset& ds) {
  auto os = open_out(path);
  for (std::size_t c = 0; c < ds.columns.size(); ++c) {
    os << (c ? "," : "") << ds.columns[c];
  }
  os << "\n";
  for (const auto& row : ds.rows) {
    if (row.size() != ds.columns.size()) throw IoError("dataset row width mismatch");
    for (std::size_t c = 0; c < row.size(); ++c) {
      os << (c ? "," : "") << format_double(row[c]);
    }
    os << "\n";
  }
  if (!os) throw IoError("write failed for " + path);
}

void write_dataset_records(const std::string& path, const Dataset& ds) {
  json j;
  j["schema_version"] = dataset_schema_version;
  j["name"] = ds.name;
  j["columns"] = ds.columns;
  j["meta"] = ds.meta.is_null() ? json::object() : ds.meta;
  j["rows"] = ds.rows;
  auto os = open_out(path);
  os << j.dump(1, '\t') << "\n";
  if (!os) throw IoError("write failed for " + path);
}

Dataset read_dataset_records(const std::string& path) {
  const json j = load_json(path);
  if (!j.contains("schema_version") || j["schema_version"].get<int>() != dataset_schema_version) {
    throw IoError("unsupported dataset schema in " + path);
  }
  Dataset ds;
  ds.name = j.at("name").get<std::string>();
  ds.columns = j.at("columns").get<std::vector<std::string>>();
  ds.meta = j.value("meta", json::object());
  ds.rows = j.at("rows").get<std::vector<std::vector<double>>>();
  for (const auto& row : ds.rows) {
    if (row.size() != ds.columns.size()) throw IoError("dataset row width mismatch in " + path);
  }
  return ds;
}

Dataset trajectory_dataset(const EvolveResult& run, const std::string& name) {
  Dataset ds;
  ds.name = name;
  if (run.trajectory.empty()) return ds;
  const int lmax = run.trajectory.front().resonant.ell_max;
  ds.columns = {"position_over_z0", "resonant_weight", "nonresonant_weight", "sigma"};
  for (int ell = -lmax; ell <= lmax; ++ell) {
    ds.columns.push_back("p_" + std::to_string(ell));
  }
  for (const auto& rec : run.trajectory) {
    std::vector<double> row;
    row.reserve(ds.columns.size());
    row.push_back(rec.position_over_z0);
    row.push_back(rec.resonant_weight);
    row.push_back(rec.nonresonant_weight);
    row.push_back(sideband_sigma(rec.resonant));
    for (int ell = -lmax; ell <= lmax; ++ell) {
      row.push_back(rec.resonant.prob(ell) * rec.resonant_weight);
    }
    ds.rows.push_back(std::move(row));
  }
  return ds;
}

std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot hash " + path);
  std::uint64_t h = 14695981039346656037ULL;
  char buf[4096];
  while (is.read(buf, sizeof(buf)) || is.gcount() > 0) {
    const std::streamsize n = is.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
  }
  return h;
}

void write_manifest(const std::string& path, RunManifest manifest) {
  const fs::path dir = fs::path(path).parent_path();
  json outs = json::array();
  for (auto& out : manifest.outputs) {
    const fs::path target = dir.empty() ? fs::path(out.file) : dir / out.file;
    std::error_code ec;
    const auto size = fs::file_size(target, ec);
    if (ec) throw IoError("manifest output missing: " + target.string());
    out.bytes = static_cast<std::uint64_t>(size);
    char hex[20];
    std::snprintf(hex, sizeof(hex), "0x%016llx",
                  static_cast<unsigned long long>(fnv1a64_file(target.string())));
    out.fnv1a64 = hex;
    outs.push_back({{"file", out.file}, {"bytes", out.bytes}, {"fnv1a64", out.fnv1a64}});
  }
  json j;
  j["schema_version"] = dataset_schema_version;
  j["generator"] = "ecomb " + library_version();
  j["command"] = manifest.command;
  j["config"] = manifest.config;
  j["outputs"] = outs;
  auto os = open_out(path);
  os << j.dump(1, '\t') << "\n";
  if (!os) throw IoError("write failed for " + path);
}

RunManifest read_manifest(const std::string& path) {
  const json j = load_json(path);
  if (!j.contains("schema_version") || j["schema_version"].get<int>() != dataset_schema_version) {
    throw IoError("unsupported manifest schema in " + path);
  }
  RunManifest m;
  m.command = j.value("command", "");
  m.config = j.value("config", json::object());
  for (const auto& out : j.value("outputs", json::array())) {
    ManifestOutput o;
    o.file = out.at("file").get<std::string>();
    o.bytes = out.value("bytes", 0ULL);
    o.fnv1a64 = out.value("fnv1a64", "");
    m.outputs.push_back(std::move(o));
  }
  return m;
}

void to_json(json& j, const DimensionlessProblem& p) {
  j = json{{"v_over_c", p.v_over_c},
           {"omega_ratio", p.omega_ratio},
           {"B11", complex_to_json(p.B11)},
           {"B12", complex_to_json(p.B12)},
           {"B22", complex_to_json(p.B22)},
           {"A11", complex_to_json(p.A11)},
           {"A12", complex_to_json(p.A12)},
           {"A22", complex_to_json(p.A22)},
           {"delta1", p.delta1},
           {"delta2", p.delta2},
           {"span_over_z0", p.span_over_z0},
           {"slice_count", p.slice_count},
           {"ell_max", p.ell_max}};
  if (std::isfinite(p.talbot_over_z0)) {
    j["talbot_over_z0"] = p.talbot_over_z0;
  } else {
    j["talbot_over_z0"] = "inf";
  }
}

void from_json(const json& j, DimensionlessProblem& p) {
  p.v_over_c = j.at("v_over_c").get<double>();
  p.omega_ratio = j.at("omega_ratio").get<double>();
  p.B11 = complex_from_json(j.at("B11"));
  p.B12 = complex_from_json(j.at("B12"));
  p.B22 = complex_from_json(j.at("B22"));
  p.A11 = complex_from_json(j.at("A11"));
  p.A12 = complex_from_json(j.at("A12"));
  p.A22 = complex_from_json(j.at("A22"));
  p.delta1 = j.at("delta1").get<double>();
  p.delta2 = j.at("delta2").get<double>();
  const auto& t = j.at("talbot_over_z0");
  p.talbot_over_z0 =
      t.is_string() ? std::numeric_limits<double>::infinity() : t.get<double>();
  p.span_over_z0 = j.at("span_over_z0").get<double>();
  p.slice_count = j.at("slice_count").get<int>();
  p.ell_max = j.at("ell_max").get<int>();
}

void to_json(json& j, const LabConfig& lab) {
  const auto beam = [](const BeamParams& b) {
    return json{{"photon_energy_eV", b.photon_energy_eV},
                {"numerical_aperture", b.numerical_aperture},
                {"power_kW", b.power_W / 1e3},
                {"phase_rad", b.phase_rad},
                {"direction", b.direction}};
  };
  j = json{{"kinetic_energy_keV", lab.kinetic_energy_eV / 1e3},
           {"beam1", beam(lab.beam1)},
           {"beam2", beam(lab.beam2)}};
}

void from_json(const json& j, LabConfig& lab) {
  const auto beam = [](const json& bj, int default_direction) {
    BeamParams b;
    b.photon_energy_eV = bj.at("photon_energy_eV").get<double>();
    b.numerical_aperture = bj.value("numerical_aperture", 0.0);
    b.power_W = bj.at("power_kW").get<double>() * 1e3;
    b.phase_rad = bj.value("phase_rad", 0.0);
    b.direction = bj.value("direction", default_direction);
    return b;
  };
  lab.kinetic_energy_eV = j.at("kinetic_energy_keV").get<double>() * 1e3;
  lab.beam1 = beam(j.at("beam1"), +1);
  lab.beam2 = beam(j.at("beam2"), -1);
}

} // namespace ecomb
