#pragma once

#include "square/corpus.hpp"
#include "square/metrics.hpp"

#include <functional>
#include <map>
#include <memory>
#include <string>

namespace square {

/// A scorer living outside this library (a BEM-style model, an LLM judge,
/// a text-similarity metric). Given a dataset it returns one score in
/// [0, 1] per example_id.
class ExternalAdapter {
public:
    virtual ~ExternalAdapter() = default;
    virtual std::string name() const = 0;
    virtual std::map<std::string, double> score(const Dataset& d) const = 0;
};

using AdapterFactory = std::function<std::unique_ptr<ExternalAdapter>(const std::string& argument)>;

/// Adapters are addressed as "name" or "name:argument". Built in:
///   constant[:value]   every example gets `value` (default 0.5)
///   label_oracle       score = gold label
///   scores_file:PATH   JSONL lines {"example_id": str, "score": number}
///                      written by an external tool from the canonical JSONL
void register_adapter(const std::string& name, AdapterFactory factory);
std::unique_ptr<ExternalAdapter> make_adapter(const std::string& spec);

/// Runs the adapter and aligns its scores to the dataset order. Missing ids
/// throw DataError listing them.
ScoredSet score_with_external(const std::string& adapter_spec, const Dataset& d);
ScoredSet score_with_external(const ExternalAdapter& adapter, const Dataset& d);

}  // namespace square
