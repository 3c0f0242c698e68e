from django.conf import settings


def engine_setting(name, value=None):
    """
    Returns `value` when given, otherwise the RISK_ENGINE default called `name`.
    """
    if value is not None:
        return value
    return settings.RISK_ENGINE[name]
