"""One-dimensional morphoelastic growth with nutrient coupling.

Submodules
----------
fields         material grids, growth fields, growth balls
energy         stored energies and the inverse constitutive map
elastostatics  constant-stress equilibrium between rigid plates
nutrients      steady reaction-diffusion on the deformed body
dynamics       growth laws and time integration
oracle         closed-form two-segment reference solutions
cli            command line runner
"""

__version__ = "0.1.0"
