#ifndef SENNS_SENNS_HPP
#define SENNS_SENNS_HPP

#include "senns/backprop.hpp"
#include "senns/data.hpp"
#include "senns/error.hpp"
#include "senns/eval.hpp"
#include "senns/grad_l1.hpp"
#include "senns/gradcheck.hpp"
#include "senns/matrix.hpp"
#include "senns/model_io.hpp"
#include "senns/network.hpp"
#include "senns/objective.hpp"
#include "senns/pairs.hpp"
#include "senns/trainer.hpp"

#endif  // SENNS_SENNS_HPP
