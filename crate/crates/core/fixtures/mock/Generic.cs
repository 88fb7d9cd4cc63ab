using UnityEngine;

// __CLASS__ component scaffold.
__NOTES__
public class __CLASS__ : MonoBehaviour
{
    [SerializeField] private bool active = true;
    [SerializeField] private float tickInterval = 0.5f;

    private float timer;

    private void Update()
    {
        if (!active)
        {
            return;
        }
        timer += Time.deltaTime;
        if (timer >= tickInterval)
        {
            timer = 0f;
            Tick();
        }
    }

    private void Tick()
    {
    }

    public void SetActive(bool value)
    {
        active = value;
    }
}
