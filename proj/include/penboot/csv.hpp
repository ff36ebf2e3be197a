#pragma once

#include <string>
#include <vector>

#include "penboot/model.hpp"

namespace penboot {

// Loads a numeric CSV with a header row.  The named response column becomes
// y; the remaining columns become the design in file order.  Ragged rows,
// empty or non-numeric cells and non-finite values are rejected with the
// offending line and column in the message.
RegressionProblem load_problem(const std::string& path, const std::string& response);

// Same parse applied to an in-memory string, used by the file loader and
// directly by tests.
RegressionProblem parse_problem(const std::string& text, const std::string& response,
                                const std::string& origin = "<string>");

// Writes header + rows as CSV.  Values are emitted with enough digits to
// round-trip a double.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

} // namespace penboot
