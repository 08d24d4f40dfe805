#pragma once

#include <string>
#include <vector>

#include "xtab/config.hpp"

namespace xtab {

// Batch pipeline stages. Each stage reads the previous stage's files from the
// output directory and writes its own; all are runnable standalone. Every
// artifact except the manifest timestamp is a pure function of the config.
void stage_preprocess(const RunConfig& config);
void stage_select(const RunConfig& config);
void stage_train(const RunConfig& config);
void stage_explain(const RunConfig& config);
void stage_metamodel(const RunConfig& config);
void stage_report(const RunConfig& config);

// preprocess -> select -> train -> explain -> metamodel -> report, plus the
// manifest. Returns the output directory.
std::string run_pipeline(const RunConfig& config);

// Explains one test-set instance (SHAP + LIME) on demand; id indexes the test
// rows of the stored split.
void explain_instance(const RunConfig& config, std::size_t instance_id);

extern const char* kToolVersion;

} // namespace xtab
