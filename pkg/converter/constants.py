N_BITS = 12
N_STAGES = 10
N_CODES = 2 ** N_BITS
MID_CODE = N_CODES // 2
MAX_CODE = N_CODES - 1

# Bits contributed by the last 1.5-bit stage and the 2-bit back end.
# Stage i (1-based) carries weight 2 ** (N_BITS - 1 - i).
STAGE_WEIGHTS = tuple(2 ** (N_BITS - 1 - i) for i in range(1, N_STAGES + 1))

# Relative capacitor and bias scaling along the pipeline (stage 1 = 1).
STAGE_SCALES = (1.0, 2.0 / 3.0) + (1.0 / 3.0,) * (N_STAGES - 2)

# One row of draws per sample: front end first, then stages 1..N_STAGES
NOISE_DRAWS_PER_SAMPLE = 1 + N_STAGES

RESIDUE_CLAMP = 1.0

GM_MODELS = [
    ('linear', 'Linear gm (strong inversion, velocity saturated)'),
    ('sqrt', 'Square-root gm (square-law devices)'),
    ('ideal', 'Ideal (complete settling)'),
]
GM_MODEL_VALUES = {value for value, _ in GM_MODELS}

# gm proportional to I ** exponent
GM_EXPONENTS = {
    'linear': 1.0,
    'sqrt': 0.5,
}

STIMULUS_KINDS = [
    ('sine', 'Coherent sine'),
    ('ramp', 'Linear ramp'),
]
STIMULUS_KIND_VALUES = {value for value, _ in STIMULUS_KINDS}

MIN_CONVERSION_RATE_HZ = 1e6
