"""Fixed sampling pattern for the 256-bit binary descriptor.

Each row is one comparison pair (ax, ay, bx, by): integer offsets from the
patch center. Endpoints were drawn once from an isotropic Gaussian with
sigma 6.5 (generator seed 613566757), rounded to integers, and re-drawn
until they fell inside the closed disc of radius 13, so the pattern stays
inside a 31x31 patch under any rotation with a 2-pixel smoothing margin.
The table is frozen: regenerating it would silently change every descriptor.
"""

COMPARISON_PAIRS = (
    (-1, 1, 3, -6),
    (2, 9, 8, -7),
    (1, -3, 0, 4),
    (-4, 4, -4, -3),
    (1, -3, -5, -4),
    (-7, 5, -3, -3),
    (2, 7, -4, -1),
    (1, 5, 4, -4),
    (-2, 3, -8, -7),
    (2, 0, -10, 7),
    (8, 1, -2, 3),
    (4, -10, 2, -4),
    (5, 7, -8, 0),
    (-5, -11, 6, -11),
    (6, -2, 8, -2),
    (-3, 4, -6, -3),
    (-12, 1, -5, -2),
    (10, 0, -4, 2),
    (-3, -1, 3, -5),
    (-3, -9, 0, 8),
    (-3, 6, -9, -4),
    (2, 2, 6, -1),
    (-4, 4, -1, 0),
    (-4, 7, 8, -9),
    (-3, 4, -2, -3),
    (2, -1, 7, -6),
    (8, -10, -4, 1),
    (2, 0, 7, 4),
    (3, -10, -6, 0),
    (-6, 2, 4, -2),
    (-6, 7, -2, -11),
    (10, 1, -7, -1),
    (-1, 4, 4, -11),
    (-3, 3, 2, 5),
    (5, 9, 1, -3),
    (-1, -4, -1, -3),
    (4, 1, -1, -4),
    (-8, 4, -9, 6),
    (6, -6, 4, -5),
    (3, 3, -9, -1),
    (7, -5, 0, 5),
    (-2, -2, 3, 3),
    (4, 0, 5, 0),
    (6, 11, 0, 9),
    (3, 6, 1, -8),
    (3, -11, 7, -6),
    (2, 5, 1, -6),
    (1, 6, 6, -2),
    (1, -8, -5, -10),
    (-6, 7, -2, 2),
    (-3, -8, -2, 10),
    (10, 1, -3, 7),
    (1, -8, -4, 3),
    (-6, 1, -2, -2),
    (7, 1, 6, 2),
    (8, 6, -6, 6),
    (0, -2, -11, -4),
    (3, 1, -10, -4),
    (-7, -6, 2, 2),
    (0, 10, -3, 2),
    (6, -2, -10, 0),
    (8, -6, 5, 2),
    (-2, 2, -1, 4),
    (5, 9, 10, -3),
    (-11, 0, 2, -5),
    (0, 9, 2, 3),
    (-6, -4, 0, -3),
    (-2, -5, 0, -3),
    (4, -1, 6, 1),
    (4, -3, 7, 4),
    (-2, 1, -1, -2),
    (1, 9, -4, -2),
    (7, -1, -1, -7),
    (2, 1, -1, -4),
    (4, 4, 9, 0),
    (-11, -1, -4, -4),
    (-6, -10, -5, -3),
    (-2, -4, 3, 0),
    (-5, 4, -5, 0),
    (4, -3, 2, 1),
    (-8, -1, -4, -5),
    (3, 1, 1, 1),
    (-8, -6, 1, 10),
    (7, 4, -3, -5),
    (-3, 8, -2, 5),
    (-3, 0, -8, 5),
    (8, 9, 12, 0),
    (4, -5, -7, -4),
    (-6, 2, -11, -3),
    (0, 10, 0, 2),
    (-3, 7, -6, -10),
    (5, 1, 3, 7),
    (1, -1, -1, 6),
    (-5, 7, 2, 7),
    (-7, 6, -8, 3),
    (-7, 3, -5, 10),
    (5, 7, 2, 3),
    (9, -4, -3, -2),
    (11, 0, 11, -5),
    (0, 7, -7, 1),
    (4, -4, -8, 0),
    (4, 8, -2, 7),
    (-4, 0, 8, 5),
    (7, 0, 6, 3),
    (-7, 0, 5, 6),
    (9, -3, -1, 8),
    (3, 1, 0, -1),
    (-3, -6, 4, 8),
    (-4, 0, 8, -1),
    (-1, 1, -2, 3),
    (0, 1, 4, -7),
    (8, -6, 1, -7),
    (5, 5, 6, 7),
    (4, 1, 1, 0),
    (-10, 8, -3, -8),
    (4, 0, -6, 1),
    (-2, -5, 3, -5),
    (3, 10, -6, -1),
    (4, 1, 7, -10),
    (0, 9, -4, 11),
    (-2, 2, 4, 5),
    (1, 8, 5, -4),
    (-10, 0, -3, -8),
    (-4, 6, 10, 5),
    (2, 1, 3, 1),
    (-4, 3, -6, 0),
    (12, -4, -4, -6),
    (2, 3, -6, 1),
    (1, -9, 1, 3),
    (2, 4, -11, 6),
    (-9, 0, 4, 6),
    (-10, 3, 4, 7),
    (5, 6, 0, 5),
    (-4, 5, -1, -6),
    (8, 2, 12, 4),
    (9, -8, -3, 11),
    (6, 7, 2, -3),
    (11, 5, 4, -3),
    (-1, 6, -3, 1),
    (-2, -3, -2, 7),
    (1, 4, 3, 5),
    (-1, 7, 5, -2),
    (-4, -1, -8, 5),
    (-2, 8, -1, 2),
    (6, -4, 0, -5),
    (4, -8, 4, 6),
    (4, -1, -1, 1),
    (-1, -5, 4, 9),
    (-3, -6, 9, -5),
    (0, -4, 5, -9),
    (9, 1, 1, -1),
    (4, -3, 5, 1),
    (-8, -3, 0, 5),
    (-7, 7, -6, 9),
    (-1, -1, 9, 4),
    (-10, 6, -12, -2),
    (4, -2, 6, -5),
    (-7, -7, 5, 1),
    (8, 7, -10, 1),
    (-10, 4, -5, 2),
    (5, 2, 7, 7),
    (-3, -3, 11, 0),
    (-4, 4, 1, 5),
    (5, 7, 2, 3),
    (-1, 3, 4, 3),
    (-6, 2, -3, 4),
    (12, 1, 4, -4),
    (-1, 4, -3, 6),
    (-8, -4, -3, -1),
    (7, -5, -1, 1),
    (6, 4, -1, -4),
    (1, 1, 1, -7),
    (-5, 2, 10, -2),
    (-3, -2, 0, 0),
    (-1, -2, -6, 0),
    (-10, 8, -5, -8),
    (-6, -7, 3, 4),
    (5, -4, 3, 1),
    (-6, -11, -1, -5),
    (-4, 3, -1, 0),
    (0, 0, 7, 2),
    (-5, 6, -5, -2),
    (-3, 3, 11, -1),
    (-3, 10, 2, 3),
    (-1, -6, -2, 11),
    (-1, 5, -1, -9),
    (-12, -3, -7, -9),
    (10, 3, -8, 9),
    (-6, 1, 5, -2),
    (-8, -7, -8, -6),
    (-5, 3, 2, 7),
    (-1, 2, -2, -3),
    (0, 1, 0, -10),
    (-10, 2, 1, 5),
    (0, -7, 6, -1),
    (-5, 8, -2, -9),
    (-3, 6, -6, 1),
    (6, -7, -1, 1),
    (-3, 0, -9, -3),
    (8, 8, 7, 0),
    (-7, -6, 5, -1),
    (-9, -9, 2, -6),
    (-10, -3, 6, 7),
    (-8, 4, -9, -6),
    (4, 7, -3, 3),
    (-5, -2, -6, -3),
    (-10, 0, -2, -2),
    (2, -2, 4, 4),
    (3, 6, -8, 6),
    (-10, 7, 4, -2),
    (-6, 3, 7, -5),
    (-3, -2, 4, 2),
    (-2, 9, -5, 0),
    (5, -4, 1, 7),
    (-4, 6, -2, 0),
    (2, -5, -1, 5),
    (-10, 4, 1, 3),
    (6, 1, 0, 8),
    (11, -4, -11, 6),
    (0, -4, -8, 2),
    (-11, -3, -10, 4),
    (5, 3, -8, 2),
    (-8, -8, 0, 0),
    (-5, -5, 0, -9),
    (-8, 8, 0, -5),
    (-8, -6, -11, -1),
    (-6, 5, -6, 4),
    (4, -5, -5, 10),
    (4, -3, -9, 4),
    (4, -7, 11, -1),
    (-1, -3, 4, -11),
    (-1, -6, -2, 0),
    (3, -5, 2, 0),
    (-6, -3, -2, -5),
    (-7, 3, 0, 10),
    (2, 10, 5, 3),
    (-2, 5, 7, 3),
    (8, 0, 7, 3),
    (7, -2, 4, 9),
    (-10, -1, -7, -1),
    (6, -11, -4, -1),
    (-4, -4, 2, -4),
    (-11, -1, 8, 2),
    (-6, 2, 12, 5),
    (0, -4, -3, 8),
    (0, 4, 3, 4),
    (0, -12, 10, 1),
    (9, -8, 3, -7),
    (4, -10, -8, -2),
    (-2, -1, 5, 0),
    (-1, -1, 10, 4),
    (-1, -9, 4, -6),
    (-1, -9, 3, 6),
    (4, -1, 5, 2),
    (5, 8, 8, -8),
    (6, -3, -3, 0),
)
