#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qsr/channels.hpp"
#include "qsr/coding.hpp"
#include "qsr/linalg.hpp"
#include "qsr/rng.hpp"

namespace qsr {

using json = nlohmann::json;

// floats rendered with 12 significant digits, '.' decimal, locale-free
inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Mat matrix_from_json(const json& rows) {
  if (!rows.is_array() || rows.empty())
    throw std::invalid_argument("matrix_from_json: expected a non-empty array of rows");
  const auto nr = static_cast<Eigen::Index>(rows.size());
  const auto nc = static_cast<Eigen::Index>(rows[0].size());
  Mat m(nr, nc);
  for (Eigen::Index i = 0; i < nr; ++i) {
    const json& row = rows[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(row.size()) != nc)
      throw std::invalid_argument("matrix_from_json: ragged rows");
    for (Eigen::Index j = 0; j < nc; ++j) {
      const json& e = row[static_cast<std::size_t>(j)];
      if (!e.is_array() || e.size() != 2)
        throw std::invalid_argument("matrix_from_json: entries must be [re, im]");
      m(i, j) = cx(e[0].get<double>(), e[1].get<double>());
    }
  }
  return m;
}

inline json channel_to_json(const SubChannel& ch) {
  json ks = json::array();
  for (const Mat& k : ch.kraus()) ks.push_back(matrix_to_json(k));
  return json{{"kraus", std::move(ks)}};
}

inline std::vector<Mat> kraus_from_json(const json& ks) {
  if (!ks.is_array() || ks.empty())
    throw std::invalid_argument("kraus_from_json: expected a non-empty array");
  std::vector<Mat> out;
  out.reserve(ks.size());
  for (const json& k : ks) out.push_back(matrix_from_json(k));
  return out;
}

// On-disk description of a finite channel family (plus the jammer register
// size when the family is a joint-channel restriction).
struct ChannelSpecFile {
  Eigen::Index dim_in = 0;
  Eigen::Index dim_out = 0;
  std::vector<std::string> names;
  std::vector<Channel> channels;
  std::optional<Eigen::Index> jammer_dim;
};

inline ChannelSpecFile channel_spec_from_json(const json& doc) {
  ChannelSpecFile spec;
  spec.dim_in = doc.at("dim_in").get<Eigen::Index>();
  spec.dim_out = doc.at("dim_out").get<Eigen::Index>();
  if (doc.contains("jammer_dim")) spec.jammer_dim = doc.at("jammer_dim").get<Eigen::Index>();
  const json& chans = doc.at("channels");
  if (!chans.is_array() || chans.empty())
    throw std::invalid_argument("channel spec: 'channels' must be a non-empty array");
  for (const json& c : chans) {
    const std::string name = c.at("name").get<std::string>();
    for (const std::string& seen : spec.names)
      if (seen == name) throw std::invalid_argument("channel spec: duplicate name '" + name + "'");
    spec.names.push_back(name);
    std::vector<Mat> ks = kraus_from_json(c.at("kraus"));
    for (const Mat& k : ks)
      if (k.rows() != spec.dim_out || k.cols() != spec.dim_in)
        throw std::invalid_argument("channel spec: Kraus shape mismatch in '" + name + "'");
    spec.channels.emplace_back(std::move(ks), spec.dim_in, spec.dim_out);
  }
  return spec;
}

inline ChannelSpecFile load_channel_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open channel spec '" + path + "'");
  json doc;
  in >> doc;  // throws json::parse_error with line/byte diagnostics
  return channel_spec_from_json(doc);
}

inline json channel_spec_to_json(const ChannelSpecFile& spec) {
  json chans = json::array();
  for (std::size_t i = 0; i < spec.channels.size(); ++i) {
    json c = channel_to_json(spec.channels[i]);
    c["name"] = spec.names[i];
    chans.push_back(std::move(c));
  }
  json doc{{"dim_in", spec.dim_in}, {"dim_out", spec.dim_out}, {"channels", std::move(chans)}};
  if (spec.jammer_dim) doc["jammer_dim"] = *spec.jammer_dim;
  return doc;
}

inline json cet_code_to_json(const CETCode& code) {
  json encs = json::array(), decs = json::array();
  for (const Channel& p : code.encoders) encs.push_back(channel_to_json(p));
  for (const SubChannel& r : code.decoders) decs.push_back(channel_to_json(r));
  return json{{"m2", code.m2},
              {"n", code.n},
              {"encoders", std::move(encs)},
              {"decoders", std::move(decs)}};
}

inline CETCode cet_code_from_json(const json& doc) {
  CETCode code;
  code.m2 = doc.at("m2").get<Eigen::Index>();
  code.n = doc.at("n").get<int>();
  for (const json& e : doc.at("encoders")) {
    std::vector<Mat> ks = kraus_from_json(e.at("kraus"));
    code.encoders.emplace_back(std::move(ks));
  }
  for (const json& d : doc.at("decoders")) {
    std::vector<Mat> ks = kraus_from_json(d.at("kraus"));
    code.decoders.emplace_back(std::move(ks));
  }
  if (code.encoders.size() != code.decoders.size())
    throw std::invalid_argument("code bundle: encoder/decoder count mismatch");
  return code;
}

// every emitted report carries its provenance header
inline json report_envelope(std::uint64_t seed, const std::string& config_blob) {
#ifdef QSR_VERSION
  const char* version = QSR_VERSION;
#else
  const char* version = "dev";
#endif
  return json{{"seed", seed},
              {"config_hash", Rng::fnv1a(config_blob)},
              {"version", version}};
}

// header + rows of %.12g cells, '\n' endings
inline std::string csv_table(const std::vector<std::string>& header,
                             const std::vector<std::vector<double>>& rows) {
  std::ostringstream out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out << ',';
    out << header[i];
  }
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << format_number(row[i]);
    }
    out << '\n';
  }
  return out.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open output file '" + path + "'");
  out << content;
}

}  // namespace qsr
