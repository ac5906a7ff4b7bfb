// Copyright 2026 The overtake Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "overtake/common.hpp"
#include "overtake/ptc_qp.hpp"

namespace overtake {
namespace {

constexpr const char* kMagic = "overtake-qp 1";

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_row(std::ostream& out, const double* data, Eigen::Index count,
               Eigen::Index stride) {
  for (Eigen::Index j = 0; j < count; ++j) {
    if (j > 0) out << ' ';
    out << num(data[j * stride]);
  }
  out << '\n';
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty() && line[0] != '#') return line;
    }
    throw ParseError("unexpected end of file", line_);
  }

  void expect(const std::string& word) {
    const std::string got = next();
    if (got != word) throw ParseError("expected '" + word + "', got '" + got + "'", line_);
  }

  std::vector<double> numbers(Eigen::Index count) {
    if (count == 0) return {};
    std::istringstream ss(next());
    std::vector<double> out;
    std::string tok;
    while (ss >> tok) {
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0' || std::isnan(v)) {
        throw ParseError("not a number: '" + tok + "'", line_);
      }
      out.push_back(v);
    }
    if (static_cast<Eigen::Index>(out.size()) != count) {
      throw ParseError("expected " + std::to_string(count) + " values, got " +
                           std::to_string(out.size()),
                       line_);
    }
    return out;
  }

  int line() const { return line_; }

 private:
  std::istream& in_;
  int line_ = 0;
};

}  // namespace

void write_qp_dump(std::ostream& out, const DenseQp& qp, const PtcConfig& cfg) {
  out << kMagic << '\n';
  out << "n " << qp.n() << " m " << qp.m() << '\n';
  out << "config step_scale " << num(cfg.step_scale) << " max_iter "
      << cfg.max_iter << " tol " << num(cfg.tol) << " eps1_rel "
      << num(cfg.eps1_rel) << " eps2 " << num(cfg.eps2) << " adaptive "
      << cfg.adaptive << " gll_memory " << cfg.gll_memory << " equilibrate "
      << cfg.equilibrate << " form "
      << (cfg.form == ResidualForm::kCoupled ? "coupled" : "printed") << " polish "
      << cfg.polish << '\n';
  out << "P\n";
  for (Eigen::Index i = 0; i < qp.n(); ++i) write_row(out, &qp.P(i, 0), qp.n(), qp.P.outerStride());
  out << "q\n";
  write_row(out, qp.q.data(), qp.n(), 1);
  out << "A\n";
  for (Eigen::Index i = 0; i < qp.m(); ++i) write_row(out, &qp.A(i, 0), qp.n(), qp.A.outerStride());
  out << "l\n";
  write_row(out, qp.l.data(), qp.m(), 1);
  out << "u\n";
  write_row(out, qp.u.data(), qp.m(), 1);
  out << "end\n";
}

DenseQp read_qp_dump(std::istream& in, PtcConfig* cfg) {
  Reader rd(in);
  rd.expect(kMagic);
  Eigen::Index n = 0, m = 0;
  {
    std::istringstream ss(rd.next());
    std::string kn, km;
    if (!(ss >> kn >> n >> km >> m) || kn != "n" || km != "m" || n < 1 || m < 0) {
      throw ParseError("expected 'n <count> m <count>'", rd.line());
    }
  }
  {
    std::istringstream ss(rd.next());
    std::string key;
    ss >> key;
    if (key != "config") throw ParseError("expected config line", rd.line());
    PtcConfig c;
    std::string k, v;
    while (ss >> k >> v) {
      try {
        if (k == "step_scale") c.step_scale = std::stod(v);
        else if (k == "max_iter") c.max_iter = std::stoi(v);
        else if (k == "tol") c.tol = std::stod(v);
        else if (k == "eps1_rel") c.eps1_rel = std::stod(v);
        else if (k == "eps2") c.eps2 = std::stod(v);
        else if (k == "adaptive") c.adaptive = v == "1";
        else if (k == "gll_memory") c.gll_memory = std::stoi(v);
        else if (k == "equilibrate") c.equilibrate = v == "1";
        else if (k == "polish") c.polish = v == "1";
        else if (k == "form") c.form = v == "printed" ? ResidualForm::kPrinted : ResidualForm::kCoupled;
        else throw ParseError("unknown config key '" + k + "'", rd.line());
      } catch (const std::logic_error&) {
        throw ParseError("bad value for '" + k + "'", rd.line());
      }
    }
    if (cfg != nullptr) *cfg = c;
  }
  DenseQp qp;
  qp.P.resize(n, n);
  rd.expect("P");
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto row = rd.numbers(n);
    for (Eigen::Index j = 0; j < n; ++j) qp.P(i, j) = row[static_cast<std::size_t>(j)];
  }
  rd.expect("q");
  const auto q = rd.numbers(n);
  qp.q = Eigen::Map<const Eigen::VectorXd>(q.data(), n);
  rd.expect("A");
  qp.A.resize(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto row = rd.numbers(n);
    for (Eigen::Index j = 0; j < n; ++j) qp.A(i, j) = row[static_cast<std::size_t>(j)];
  }
  rd.expect("l");
  const auto l = rd.numbers(m);
  rd.expect("u");
  const auto u = rd.numbers(m);
  qp.l = Eigen::Map<const Eigen::VectorXd>(l.data(), m);
  qp.u = Eigen::Map<const Eigen::VectorXd>(u.data(), m);
  rd.expect("end");
  return qp;
}

}  // namespace overtake
