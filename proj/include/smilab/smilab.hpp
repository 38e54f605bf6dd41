#pragma once

#include "smilab/config.hpp"
#include "smilab/einselection.hpp"
#include "smilab/ensemble.hpp"
#include "smilab/errors.hpp"
#include "smilab/lab.hpp"
#include "smilab/pw.hpp"
#include "smilab/quantum.hpp"
#include "smilab/report.hpp"
#include "smilab/rng.hpp"
#include "smilab/runner.hpp"
#include "smilab/sampling.hpp"
#include "smilab/smi.hpp"
#include "smilab/verify.hpp"
#include "smilab/version.hpp"
