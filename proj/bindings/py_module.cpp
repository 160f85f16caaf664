// Python extension: a thin veneer over the C++ library.  JSON documents cross
// the boundary as plain Python dicts/lists (round-tripped through the json
// module), big integers as decimal strings, and byte strings as bytes.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <memory>
#include <string>

#include "cpx/agents.hpp"
#include "cpx/audit.hpp"
#include "cpx/crypto.hpp"
#include "cpx/errors.hpp"
#include "cpx/group.hpp"
#include "cpx/metrics.hpp"
#include "cpx/principles.hpp"
#include "cpx/rng.hpp"
#include "cpx/scenario.hpp"

namespace py = pybind11;
using namespace cpx;

namespace {

py::object to_py(const Json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

Json from_py(const py::handle& obj) {
  const std::string text =
      py::cast<std::string>(py::module_::import("json").attr("dumps")(obj));
  return Json::parse(text);
}

mpz_class big(const std::string& decimal) { return mpz_class(decimal, 10); }

std::string dec(const mpz_class& x) { return x.get_str(10); }

Bytes to_bytes_vec(const py::bytes& b) {
  const std::string s = b;
  return Bytes(s.begin(), s.end());
}

/// One ecosystem plus the trace of its last run; the unit of work most
/// Python callers want.
class Simulation {
 public:
  Simulation(py::object config, const std::string& profile, std::uint64_t seed) {
    EcosystemConfig cfg = config.is_none()
                              ? EcosystemConfig::default_config(profile)
                              : EcosystemConfig::from_json(from_py(config));
    eco_ = setup_ecosystem(cfg, seed);
  }

  py::object run(py::object script) {
    const ScenarioScript s = script.is_none()
                                 ? ScenarioScript::default_career()
                                 : ScenarioScript::from_json(from_py(script));
    trace_ = run_script(*eco_, s);
    has_trace_ = true;
    return to_py(trace_.summary_json());
  }

  py::object metrics() const {
    require_trace();
    return to_py(compute_metrics(trace_, TimeModel::defaults()).to_json());
  }

  py::object principles() {
    require_trace();
    return to_py(run_principles_checks(trace_, *eco_).to_json());
  }

  py::object wallet() const {
    return to_py(eco_->holder().wallet().list_all_data(eco_->params()));
  }

  std::string export_wallet() const {
    return eco_->holder().wallet().export_wallet(eco_->params());
  }

  std::string audit_jsonl() const { return eco_->audit().export_jsonl(); }

  void write_trace_dir(const std::string& dir) {
    require_trace();
    const Json m = compute_metrics(trace_, TimeModel::defaults()).to_json();
    const Json p = run_principles_checks(trace_, *eco_).to_json();
    cpx::write_trace_dir(trace_, m, p, dir);
  }

  std::string profile() const { return eco_->params().profile(); }
  std::uint64_t seed() const { return eco_->seed(); }

 private:
  void require_trace() const {
    if (!has_trace_)
      throw ProtocolError(ErrorCode::ValidationError,
                          "no trace yet: call run() first");
  }

  std::unique_ptr<Ecosystem> eco_;
  RunTrace trace_;
  bool has_trace_ = false;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Clinical credential passporting: protocol core and simulator";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ProtocolError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.def("profiles", [] {
    return std::vector<std::string>{"toy", "production"};
  });

  m.def(
      "default_config",
      [](const std::string& profile) {
        return to_py(EcosystemConfig::default_config(profile).to_json());
      },
      py::arg("profile") = "toy",
      "The stock ecosystem configuration for a profile, as a dict.");

  m.def(
      "default_career",
      [] { return to_py(ScenarioScript::default_career().to_json()); },
      "The built-in nine-moment career script, as a dict.");

  // --- crypto primitives (big integers as decimal strings) ---------------

  m.def(
      "keygen",
      [](const std::string& profile, std::uint64_t seed) {
        SeededRng rng(seed);
        const KeyPair kp = keygen(GroupParams::by_name(profile), rng);
        py::dict out;
        out["sk"] = dec(kp.sk);
        out["pk"] = dec(kp.pk);
        return out;
      },
      py::arg("profile"), py::arg("seed"));

  m.def(
      "sign",
      [](const std::string& profile, const std::string& sk,
         const py::bytes& message, std::uint64_t seed) {
        SeededRng rng(seed);
        const SchnorrSignature sig = sign(GroupParams::by_name(profile),
                                          big(sk), to_bytes_vec(message), rng);
        py::dict out;
        out["challenge"] = dec(sig.challenge);
        out["response"] = dec(sig.response);
        return out;
      },
      py::arg("profile"), py::arg("sk"), py::arg("message"), py::arg("seed"));

  m.def(
      "verify",
      [](const std::string& profile, const std::string& pk,
         const py::bytes& message, const py::dict& sig) {
        SchnorrSignature s;
        s.challenge = big(py::cast<std::string>(sig["challenge"]));
        s.response = big(py::cast<std::string>(sig["response"]));
        return verify_sig(GroupParams::by_name(profile), big(pk),
                          to_bytes_vec(message), s);
      },
      py::arg("profile"), py::arg("pk"), py::arg("message"), py::arg("sig"));

  m.def(
      "commit",
      [](const std::string& profile, const std::string& secret,
         const std::string& blinding) {
        return dec(
            commit(GroupParams::by_name(profile), big(secret), big(blinding)));
      },
      py::arg("profile"), py::arg("secret"), py::arg("blinding"),
      "Pedersen commitment to `secret` under `blinding`.");

  // --- audit log helpers ---------------------------------------------------

  m.def(
      "verify_audit",
      [](const std::string& jsonl) {
        const ChainStatus st = AuditLog::import_jsonl(jsonl).verify_chain();
        return py::make_tuple(st.ok, st.first_bad_index);
      },
      py::arg("jsonl"),
      "Check a hash-chained event log; returns (ok, first_bad_index).");

  m.def(
      "trace_credential",
      [](const std::string& jsonl, const std::string& credential_id) {
        py::list out;
        const AuditLog log = AuditLog::import_jsonl(jsonl);
        for (const auto& e : log.trace_credential(credential_id))
          out.append(to_py(AuditLog::event_to_json(e)));
        return out;
      },
      py::arg("jsonl"), py::arg("credential_id"),
      "Every event referencing the credential, in chain order.");

  // --- the simulator -------------------------------------------------------

  py::class_<Simulation>(m, "Simulation",
                         "An ecosystem brought up from a config and seed; "
                         "run() executes a career script against it.")
      .def(py::init<py::object, const std::string&, std::uint64_t>(),
           py::arg("config") = py::none(), py::arg("profile") = "toy",
           py::arg("seed") = 42)
      .def("run", &Simulation::run, py::arg("script") = py::none(),
           "Execute a script (default: the built-in career); returns the "
           "trace as a dict.")
      .def("metrics", &Simulation::metrics)
      .def("principles", &Simulation::principles)
      .def("wallet", &Simulation::wallet)
      .def("export_wallet", &Simulation::export_wallet)
      .def("audit_jsonl", &Simulation::audit_jsonl)
      .def("write_trace_dir", &Simulation::write_trace_dir, py::arg("dir"))
      .def_property_readonly("profile", &Simulation::profile)
      .def_property_readonly("seed", &Simulation::seed);
}
