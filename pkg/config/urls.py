"""
URL configuration for the tagging-latency project.

Only the admin is served: it shows the run ledger and the runtime
preferences. Everything else happens through management commands.
"""
from django.contrib import admin
from django.urls import path

urlpatterns = [
    path('admin/', admin.site.urls),
]
