#pragma once

#include "condyr/algebra.hpp"
#include "condyr/dictionary.hpp"
#include "condyr/errors.hpp"
#include "condyr/executor.hpp"
#include "condyr/flat_oracle.hpp"
#include "condyr/nquads.hpp"
#include "condyr/plan.hpp"
#include "condyr/planner.hpp"
#include "condyr/sample.hpp"
#include "condyr/selftest.hpp"
#include "condyr/sparql.hpp"
#include "condyr/sql.hpp"
#include "condyr/store.hpp"
#include "condyr/term.hpp"
#include "condyr/validity.hpp"
#include "condyr/workload.hpp"
