// Copyright 2026 The ppseg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "ppseg/analysis.hpp"
#include "ppseg/assign.hpp"
#include "ppseg/error.hpp"
#include "ppseg/fusion.hpp"
#include "ppseg/metrics.hpp"
#include "ppseg/querysim.hpp"
#include "ppseg/report.hpp"
#include "ppseg/segmap.hpp"
#include "ppseg/taxonomy.hpp"

namespace py = pybind11;
using namespace ppseg;

namespace {

using UidArray = py::array_t<std::uint32_t, py::array::c_style | py::array::forcecast>;

PanopticPartMap ToMap(const UidArray& a) {
  if (a.ndim() != 2) throw py::value_error("label maps must be 2-D (height, width)");
  const auto h = static_cast<std::uint32_t>(a.shape(0)), w = static_cast<std::uint32_t>(a.shape(1));
  std::vector<std::uint32_t> data(a.data(), a.data() + a.size());
  return PanopticPartMap(w, h, std::move(data));
}

UidArray FromMap(const PanopticPartMap& m) {
  UidArray a({static_cast<py::ssize_t>(m.height()), static_cast<py::ssize_t>(m.width())});
  std::memcpy(a.mutable_data(), m.data().data(), m.size() * sizeof(std::uint32_t));
  return a;
}

std::vector<PanopticPartMap> ToMaps(const std::vector<UidArray>& arrays) {
  std::vector<PanopticPartMap> maps;
  maps.reserve(arrays.size());
  for (const UidArray& a : arrays) maps.push_back(ToMap(a));
  return maps;
}

}  // namespace

PYBIND11_MODULE(_ppseg, m) {
  m.doc() = "Panoptic part segmentation metrics, fusion and decoder simulation";
  m.attr("__version__") = std::string(kToolVersion);

  py::register_exception<Error>(m, "PpsegError", PyExc_ValueError);

  m.def(
      "encode_uid",
      [](int sid, std::optional<int> iid, std::optional<int> pid) {
        return EncodeUid(sid, iid, pid).value;
      },
      py::arg("sid"), py::arg("iid") = py::none(), py::arg("pid") = py::none());
  m.def("decode_uid", [](std::uint32_t uid) {
    const LabelTriple t = DecodeUid(Uid{uid});
    return py::make_tuple(t.sid, t.iid, t.pid);
  });

  py::class_<Taxonomy>(m, "Taxonomy")
      .def_static("load", [](const std::string& path) { return LoadTaxonomyFile(path); }, py::arg("path"))
      .def_static("from_json", [](const std::string& text) { return ValidateTaxonomy(text); })
      .def("to_json", &Taxonomy::ToJson)
      .def_property_readonly("void_uid", &Taxonomy::void_uid)
      .def_property_readonly("part_classes", &Taxonomy::part_classes)
      .def_property_readonly("no_part_classes", &Taxonomy::no_part_classes)
      .def_property_readonly("hash", [](const Taxonomy& t) { return TaxonomyHash(t); })
      .def("has_parts", &Taxonomy::HasParts)
      .def("is_thing", &Taxonomy::IsThing);

  m.def("read_ppsm", [](const std::string& path) { return FromMap(ReadPpsmFile(path)); });
  m.def("write_ppsm", [](const std::string& path, const UidArray& a) { WritePpsmFile(path, ToMap(a)); });
  m.def("ppsm_bytes", [](const UidArray& a) {
    const std::vector<std::uint8_t> b = WritePpsm(ToMap(a));
    return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
  });

  m.def(
      "_evaluate_json",
      [](const std::vector<UidArray>& gt, const std::vector<UidArray>& pred, const Taxonomy& tax,
         unsigned threads, bool void_fp_rule, bool miou_full_label_set) {
        const std::vector<PanopticPartMap> g = ToMaps(gt), p = ToMaps(pred);
        const EvalConfig config{void_fp_rule, miou_full_label_set};
        py::gil_scoped_release release;
        const MetricReport r = BuildReport(EvaluateDataset(g, p, tax, config, threads), tax, config);
        return ReportToJson(MakeReportDocument(r, tax, config));
      },
      py::arg("gt"), py::arg("pred"), py::arg("taxonomy"), py::arg("threads") = 1,
      py::arg("void_fp_rule") = true, py::arg("miou_full_label_set") = false);

  m.def(
      "_oracle_json",
      [](const std::vector<UidArray>& gt, const std::vector<UidArray>& pred_panoptic,
         const std::vector<UidArray>& pred_parts, const Taxonomy& tax, unsigned threads) {
        const std::vector<PanopticPartMap> g = ToMaps(gt), p = ToMaps(pred_panoptic);
        std::vector<PartLabelGrid> parts;
        for (const UidArray& a : pred_parts) parts.push_back(PartLabelGrid::FromMap(ToMap(a)));
        py::gil_scoped_release release;
        return OracleToJson(RunOracle(g, p, parts, tax, {}, {}, threads), tax, {});
      },
      py::arg("gt"), py::arg("pred_panoptic"), py::arg("pred_parts"), py::arg("taxonomy"),
      py::arg("threads") = 1);

  m.def(
      "merge",
      [](const UidArray& panoptic, const UidArray& parts, const Taxonomy& tax,
         bool void_on_mismatch, bool keep_unlabeled_parts) {
        return FromMap(MergePanopticParts(ToMap(panoptic), ToMap(parts), tax,
                                          {void_on_mismatch, keep_unlabeled_parts}));
      },
      py::arg("panoptic"), py::arg("parts"), py::arg("taxonomy"), py::arg("void_on_mismatch") = true,
      py::arg("keep_unlabeled_parts") = true);

  m.def(
      "split",
      [](const UidArray& map, const Taxonomy& tax) {
        const MapComponents c = SplitComponents(ToMap(map), tax);
        return py::make_tuple(FromMap(c.panoptic), FromMap(c.parts.ToMap(tax.void_uid())));
      },
      py::arg("map"), py::arg("taxonomy"));

  m.def("compute_pwq", &ComputePwq, py::arg("miou_scene"), py::arg("pq_scene"),
        py::arg("miou_part"), py::arg("partpq_p"));
  py::class_<PwqComponents>(m, "PwqComponents")
      .def_readonly("ssq", &PwqComponents::ssq)
      .def_readonly("psq", &PwqComponents::psq)
      .def_readonly("pwq", &PwqComponents::pwq);
  m.def("part_whole_quality", &PartWholeQuality, py::arg("ssq"), py::arg("psq"));

  m.def(
      "hungarian",
      [](const Eigen::MatrixXd& cost) {
        const Assignment a = SolveAssignment(cost);
        return py::make_tuple(a.row_to_col, a.total_cost);
      },
      py::arg("cost"));
  m.def(
      "dice_loss",
      [](const std::vector<double>& pred, const std::vector<double>& gt) { return DiceLoss(pred, gt); },
      py::arg("pred"), py::arg("gt"));
  m.def(
      "mask_ce_loss",
      [](const std::vector<double>& logits, const std::vector<double>& gt) {
        return MaskCrossEntropy(logits, gt);
      },
      py::arg("logits"), py::arg("gt"));

  m.def(
      "check_invariants",
      [](std::uint64_t seed, const std::string& arch, int height, int width, int dim, int heads,
         int stages) {
        sim::SimulationConfig c;
        c.seed = seed;
        c.arch = arch == "v1" ? sim::Arch::kV1 : sim::Arch::kV2;
        c.height = height;
        c.width = width;
        c.dim = dim;
        c.heads = heads;
        c.stages = stages;
        py::list out;
        for (const sim::InvariantCheck& k : sim::CheckInvariants(c)) {
          py::dict d;
          d["name"] = k.name;
          d["passed"] = k.passed;
          d["value"] = k.value;
          d["tolerance"] = k.tolerance;
          d["note"] = k.note;
          out.append(d);
        }
        return out;
      },
      py::arg("seed") = 0, py::arg("arch") = "v2", py::arg("height") = 16, py::arg("width") = 16,
      py::arg("dim") = 32, py::arg("heads") = 4, py::arg("stages") = 3);

  m.def(
      "simulate",
      [](std::uint64_t seed, const std::string& arch, int height, int width, int dim, int heads,
         int stages) {
        sim::SimulationConfig c;
        c.seed = seed;
        c.arch = arch == "v1" ? sim::Arch::kV1 : sim::Arch::kV2;
        c.height = height;
        c.width = width;
        c.dim = dim;
        c.heads = heads;
        c.stages = stages;
        const sim::SimulationResult r = sim::RunSimulation(c);
        return py::make_tuple(r.states.back().queries.rows, r.states.back().masks.logits,
                              r.class_logits);
      },
      py::arg("seed") = 0, py::arg("arch") = "v2", py::arg("height") = 16, py::arg("width") = 16,
      py::arg("dim") = 32, py::arg("heads") = 4, py::arg("stages") = 3);
}
