#include <cstdio>
#include <fstream>
#include <sstream>

#include "wps/errors.hpp"
#include "wps/scoring.hpp"

namespace wps {

namespace {

std::string format_weight(double w) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", w);
  return buf;
}

}  // namespace

void save_model(const Model& model, std::ostream& out) {
  const auto& h = model.hyper;
  out << "# wps-model 1\n";
  out << "# C=" << format_weight(h.C) << "\n";
  out << "# epochs=" << h.epochs << "\n";
  out << "# beam=" << h.beam << "\n";
  out << "# window=" << h.window << "\n";
  out << "# seed=" << h.seed << "\n";
  std::set<std::string> names = model.feature_dictionary;
  for (const auto& [k, v] : model.w_r) names.insert(k);
  for (const auto& [k, v] : model.w_k) names.insert(k);
  for (const auto& name : names) out << name << '\t' << format_weight(model.weight(name)) << '\n';
}

void save_model(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path.string());
  save_model(model, out);
}

Model load_model(std::istream& in) {
  Model m;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.front() == '#') {
      auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(2, eq - 2);
      std::string value = line.substr(eq + 1);
      try {
        if (key == "C") m.hyper.C = std::stod(value);
        else if (key == "epochs") m.hyper.epochs = std::stoi(value);
        else if (key == "beam") m.hyper.beam = std::stoul(value);
        else if (key == "window") m.hyper.window = std::stoul(value);
        else if (key == "seed") m.hyper.seed = std::stoull(value);
      } catch (const std::exception&) {
        throw ParseError("bad header value for '" + key + "'", line_no);
      }
      continue;
    }
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("expected feature<TAB>weight", line_no);
    std::string name = line.substr(0, tab);
    double w;
    try {
      w = std::stod(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw ParseError("bad weight for '" + name + "'", line_no);
    }
    if (name.starts_with("r:")) m.w_r[name] = w;
    else if (name.starts_with("k:")) m.w_k[name] = w;
    else throw ParseError("feature outside the r:/k: namespaces: '" + name + "'", line_no);
    m.feature_dictionary.insert(name);
  }
  return m;
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read " + path.string());
  return load_model(in);
}

}  // namespace wps
