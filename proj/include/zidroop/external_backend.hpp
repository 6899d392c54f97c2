#pragma once

// Pass-through to an external MILP solver. The model is written as free MPS;
// the command is invoked as `<command> <model.mps> <solution.txt>` and must
// write a solution file of the form
//
//   status optimal|infeasible|<other>
//   <column name> <value>
//   ...

#include "zidroop/droop_problem.hpp"
#include "zidroop/milp.hpp"

#include <iosfwd>
#include <map>
#include <string>

namespace zidroop {

void write_mps(std::ostream& out, const lp::LinearProgram& lp, const std::vector<int>& integer_columns,
               const std::string& name = "ZIDROOP");

struct ExternalSolution {
    std::string status;
    std::map<std::string, double> values;
};

ExternalSolution read_solution(std::istream& in);

struct ExternalOptions {
    std::string command;  // executable (and leading arguments)
    std::string work_dir; // defaults to the system temp directory
};

DroopSolution solve_external(const MilpModel& model, const DroopProblem& problem, const ExternalOptions& options);

}  // namespace zidroop
