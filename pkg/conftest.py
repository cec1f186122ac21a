import os

import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "docker.settings")
django.setup()
