#pragma once

// Convenience umbrella for library consumers.

#include "zkimg/chain.hpp"
#include "zkimg/checker.hpp"
#include "zkimg/circuit.hpp"
#include "zkimg/errors.hpp"
#include "zkimg/expr.hpp"
#include "zkimg/field.hpp"
#include "zkimg/gadgets.hpp"
#include "zkimg/image.hpp"
#include "zkimg/layout_io.hpp"
#include "zkimg/pipeline.hpp"
#include "zkimg/poseidon.hpp"
#include "zkimg/poseidon_gadget.hpp"
#include "zkimg/serial.hpp"
#include "zkimg/transforms.hpp"
#include "zkimg/transforms_synth.hpp"
