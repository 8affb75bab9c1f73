// Copyright 2026 The HRCS Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hrcs/circuits.hpp"

#include <string>

namespace hrcs {

void GateSequence::validate(int n_qubits) const {
  for (const auto& g : gates) {
    const int arity = g.kind == GateKind::kCx ? 2 : 1;
    for (int k = 0; k < arity; ++k) {
      if (g.qubits[k] < 0 || g.qubits[k] >= n_qubits) {
        throw ConfigError("gate addresses qubit " + std::to_string(g.qubits[k]) + " outside a " +
                          std::to_string(n_qubits) + "-qubit register");
      }
    }
    if (arity == 2 && g.qubits[0] == g.qubits[1]) throw ConfigError("CX control equals target");
  }
}

GateSequence build_hea(int n_qubits, const HeaParams& params) {
  if (n_qubits < 2) throw ConfigError("HEA needs at least 2 qubits");
  if (params.layers < 1 || params.thetas.rows() != params.layers || params.phis.rows() != params.layers ||
      params.thetas.cols() != n_qubits || params.phis.cols() != n_qubits) {
    throw ConfigError("HEA parameter shape does not match " + std::to_string(n_qubits) + " qubits");
  }
  GateSequence seq;
  seq.gates.reserve(static_cast<std::size_t>(hea_gate_count(n_qubits, params.layers).total()));
  for (int l = 0; l < params.layers; ++l) {
    for (int q = 0; q < n_qubits; ++q) {
      seq.gates.push_back(Gate::rx(q, params.thetas(l, q)));
      seq.gates.push_back(Gate::rz(q, params.phis(l, q)));
    }
    for (int q = 0; q + 1 < n_qubits; q += 2) seq.gates.push_back(Gate::cx(q, q + 1));
    for (int q = 1; q + 1 < n_qubits; q += 2) seq.gates.push_back(Gate::cx(q, q + 1));
  }
  return seq;
}

GateCount count_gates(const GateSequence& seq) {
  GateCount c;
  for (const auto& g : seq.gates) {
    switch (g.kind) {
      case GateKind::kRx: ++c.rx; break;
      case GateKind::kRz: ++c.rz; break;
      case GateKind::kCx: ++c.cx; break;
    }
  }
  return c;
}

GateCount hea_gate_count(int n_qubits, int layers) {
  return {n_qubits * layers, n_qubits * layers, (n_qubits / 2 + (n_qubits - 1) / 2) * layers};
}

CMatrix<double> gate_sequence_to_unitary(const GateSequence& seq, int n_qubits) {
  if (n_qubits < 1 || n_qubits > 12) {
    throw CapacityError("dense unitary limited to 1..12 qubits, got " + std::to_string(n_qubits));
  }
  seq.validate(n_qubits);
  const Eigen::Index d = Eigen::Index{1} << n_qubits;
  CMatrix<double> u = CMatrix<double>::Identity(d, d);
  apply_gates_rows(u, seq);
  return u;
}

namespace {

const char* kind_name(GateKind k) {
  switch (k) {
    case GateKind::kRx: return "rx";
    case GateKind::kRz: return "rz";
    case GateKind::kCx: return "cx";
  }
  return "?";
}

}  // namespace

void to_json(nlohmann::json& j, const Gate& g) {
  j = nlohmann::json::object();
  j["kind"] = kind_name(g.kind);
  if (g.kind == GateKind::kCx) {
    j["qubits"] = {g.qubits[0], g.qubits[1]};
  } else {
    j["qubits"] = {g.qubits[0]};
  }
  j["angle"] = g.angle;
}

void from_json(const nlohmann::json& j, Gate& g) {
  const auto kind = j.at("kind").get<std::string>();
  const auto qubits = j.at("qubits").get<std::vector<int>>();
  const double angle = j.contains("angle") ? j.at("angle").get<double>() : 0.0;
  if (kind == "rx" || kind == "rz") {
    if (qubits.size() != 1) throw ConfigError("rotation gate needs exactly one qubit");
    g = kind == "rx" ? Gate::rx(qubits[0], angle) : Gate::rz(qubits[0], angle);
  } else if (kind == "cx") {
    if (qubits.size() != 2) throw ConfigError("cx gate needs exactly two qubits");
    g = Gate::cx(qubits[0], qubits[1]);
  } else {
    throw ConfigError("unknown gate kind: " + kind);
  }
}

void to_json(nlohmann::json& j, const GateSequence& seq) {
  j = nlohmann::json::array();
  for (const auto& g : seq.gates) j.push_back(g);
}

void from_json(const nlohmann::json& j, GateSequence& seq) {
  if (!j.is_array()) throw ConfigError("gate sequence must be a JSON array");
  seq.gates.clear();
  for (const auto& item : j) seq.gates.push_back(item.get<Gate>());
}

}  // namespace hrcs
