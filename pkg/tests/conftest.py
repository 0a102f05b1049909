from hypothesis import HealthCheck, settings

# heavy numeric properties: no deadline, and derandomize so the suite is
# reproducible run to run
settings.register_profile(
    "semijulia",
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("semijulia")
